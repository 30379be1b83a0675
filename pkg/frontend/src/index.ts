export { parseCsv, readCsv, median } from "./csv.js";
export { Figure, PALETTE } from "./svg.js";
export { gainBarLayout, renderGainBars } from "./gainBars.js";
export { flowLayout, renderFlow, ribbonTotals } from "./flow.js";
export { seriesLayout, renderSeries } from "./series.js";
export { buildFigure, main } from "./cli.js";
