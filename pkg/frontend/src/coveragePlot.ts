/** Coverage growth plot: discovered edges over time, one step line per
 * fuzzer, logarithmic left axis. Selected testcases appear as vertical lines
 * at their discovery time, stroked in the owner's color.
 */

import * as d3 from "d3";
import { SelectionStore } from "./state";
import { TimePlot, type Series } from "./timeplot";
import type { CurvePoint } from "./types";

export class CoveragePlotView extends TimePlot {
  protected yScale: d3.ScaleLogarithmic<number, number>;

  constructor(
    container: HTMLElement,
    store: SelectionStore,
    curves: Record<string, CurvePoint[]>,
    colorOf: (fuzzer: string) => string,
  ) {
    const series: Series = new Map(
      Object.entries(curves).map(([fuzzer, points]) => [
        fuzzer,
        points.map(([t, e]) => [t, e] as [number, number]),
      ]),
    );
    super(container, "coverage-plot", store, series, colorOf);
    const values = [...series.values()].flat().map((p) => p[1]);
    // Log axis; the smallest observed value sits pinned at the bottom.
    const lowest = values.length ? Math.max(1, Math.min(...values)) : 1;
    const highest = values.length ? Math.max(...values) : 10;
    this.yScale = d3
      .scaleLog()
      .domain([lowest, Math.max(highest, lowest + 1)])
      .range([this.plotHeight, 0]);
    this.start();
  }

  protected makeYAxis(): d3.Axis<d3.NumberValue> {
    return d3.axisLeft(this.yScale).ticks(5, "~s");
  }
}
