/** Dashboard bootstrap: load everything once, then filter client-side. */

import * as d3 from "d3";
import { ApiClient } from "./api";
import { CoveragePlotView } from "./coveragePlot";
import { FilterPanel } from "./filterPanel";
import { GenerationsView } from "./generationsView";
import { InterestingPlotView } from "./interestingPlot";
import { ScatterplotView } from "./scatterplot";
import { SelectionStore, keyOf, type TcKey, type TestcaseLite } from "./state";
import type { AnalysisPayload, GraphPayload, Meta } from "./types";

export interface Dashboard {
  store: SelectionStore;
  scatterplot: ScatterplotView;
  coverage: CoveragePlotView;
  interesting: InterestingPlotView;
  generations: GenerationsView;
  filterPanel: FilterPanel;
}

export interface DashboardData {
  meta: Meta;
  analysis: AnalysisPayload;
  embeddingPoints: { fuzzer: string; id: number; x: number; y: number }[];
  graphs: Map<string, GraphPayload>;
}

/** Wire the four views and the filter panel into the given containers. */
export function buildDashboard(
  containers: {
    scatterplot: HTMLElement;
    coverage: HTMLElement;
    interesting: HTMLElement;
    generations: HTMLElement;
    filter: HTMLElement;
  },
  data: DashboardData,
): Dashboard {
  const fuzzerIds = data.meta.fuzzers.map((f) => f.id);
  const palette = d3.scaleOrdinal<string, string>(d3.schemeCategory10).domain(fuzzerIds);
  const configured = new Map(
    data.meta.fuzzers.filter((f) => f.color).map((f) => [f.id, f.color as string]),
  );
  const colorOf = (fuzzer: string) => configured.get(fuzzer) ?? palette(fuzzer);

  const testcases: TestcaseLite[] = [];
  const timeByKey = new Map<TcKey, number>();
  for (const [fuzzer, metas] of Object.entries(data.analysis.testcases)) {
    for (const meta of metas) {
      testcases.push({ fuzzer, id: meta.id, time: meta.time });
      timeByKey.set(keyOf(fuzzer, meta.id), meta.time);
    }
  }
  const store = new SelectionStore(data.meta.horizon_s, fuzzerIds, testcases);

  const scatterplot = new ScatterplotView(
    containers.scatterplot,
    store,
    data.embeddingPoints,
    colorOf,
    (key) => timeByKey.get(key) ?? 0,
  );
  const coverage = new CoveragePlotView(
    containers.coverage,
    store,
    data.analysis.curves,
    colorOf,
  );
  const interesting = new InterestingPlotView(
    containers.interesting,
    store,
    data.analysis.histogram,
    colorOf,
  );
  const generations = new GenerationsView(
    containers.generations,
    store,
    data.graphs,
    data.analysis.testcases,
    data.analysis.interestingness,
    colorOf,
    fuzzerIds,
  );
  const filterPanel = new FilterPanel(containers.filter, store, data.meta.fuzzers, colorOf);

  return { store, scatterplot, coverage, interesting, generations, filterPanel };
}

export async function loadDashboardData(api: ApiClient): Promise<DashboardData> {
  const meta = await api.meta();
  if (!meta) throw new Error("meta request superseded");
  const [analysis, embedding] = await Promise.all([api.analysis(), api.embedding()]);
  if (!analysis || !embedding) throw new Error("initial load superseded");
  const graphs = new Map<string, GraphPayload>();
  await Promise.all(
    meta.fuzzers.map(async (fuzzer) => {
      const graph = await api.graph(fuzzer.id);
      if (graph) graphs.set(fuzzer.id, graph);
    }),
  );
  return { meta, analysis, embeddingPoints: embedding.points, graphs };
}

async function start(): Promise<void> {
  const api = new ApiClient();
  const data = await loadDashboardData(api);
  const byId = (id: string) => {
    const element = document.getElementById(id);
    if (!element) throw new Error(`missing container #${id}`);
    return element;
  };
  buildDashboard(
    {
      scatterplot: byId("scatterplot"),
      coverage: byId("coverage-plot"),
      interesting: byId("interesting-plot"),
      generations: byId("generations"),
      filter: byId("filter-panel"),
    },
    data,
  );
}

if (typeof document !== "undefined" && document.getElementById("scatterplot")) {
  start().catch((error) => {
    console.error(error);
    const banner = document.createElement("div");
    banner.className = "load-error";
    banner.textContent = `failed to load analysis data: ${error}`;
    document.body.prepend(banner);
  });
}
