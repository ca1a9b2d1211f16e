export { parseCsv, readTable, column, requireColumns, ArtifactError } from "./csv.js";
export type { Table } from "./csv.js";
export { logLogFit } from "./fit.js";
export type { PowerFit } from "./fit.js";
export { validateSpec, SpecError } from "./spec.js";
export type { FigureSpec, FigureKind } from "./spec.js";
export { buildFigure } from "./figures.js";
export type { ArtifactInput, ChecksReport, CheckEntry } from "./figures.js";
export { sceneToSvg } from "./svg.js";
export { sceneToPng } from "./raster.js";
export type { Scene, Item } from "./scene.js";
export { main } from "./cli.js";
