/** Scripted linked-view tests over the real views, driven in jsdom.
 *
 * The fixtures are captured responses of the analysis API for the bundled
 * sample artifact, so these tests exercise exactly what the server ships.
 */

import { beforeEach, describe, expect, it, vi } from "vitest";
import { buildDashboard, type Dashboard, type DashboardData } from "../src/main";
import { keyOf } from "../src/state";
import type { AnalysisPayload, EmbeddingPayload, GraphPayload, Meta } from "../src/types";

import metaFixture from "./fixtures/meta.json";
import analysisFixture from "./fixtures/analysis.json";
import embeddingFixture from "./fixtures/embedding.json";
import graphFuzz0 from "./fixtures/graph_plain.json";
import graphOverlayGolden from "./fixtures/graph_overlay.json";

const meta = metaFixture as unknown as Meta;
const analysis = analysisFixture as unknown as AnalysisPayload;
const embedding = embeddingFixture as unknown as EmbeddingPayload;
const graph0 = graphFuzz0 as unknown as GraphPayload;

function fixtureData(): DashboardData {
  // The fuzz1 graph is not needed by most tests; derive a stub from the
  // payload contract (nodes from testcases, edges from parents).
  const fuzz1Nodes = analysis.testcases["fuzz1"].map((tc) => ({
    id: tc.id,
    time: tc.time,
    op: tc.op,
    level: 0,
  }));
  const fuzz1Edges: [number, number][] = [];
  for (const tc of analysis.testcases["fuzz1"]) {
    for (const parent of tc.parents) fuzz1Edges.push([parent, tc.id]);
  }
  const graph1: GraphPayload = {
    fuzzer: "fuzz1",
    until: meta.horizon_s,
    compare: null,
    nodes: fuzz1Nodes,
    edges: fuzz1Edges,
    highlighted: [],
  };
  return {
    meta,
    analysis,
    embeddingPoints: embedding.points,
    graphs: new Map([
      ["fuzz0", graph0],
      ["fuzz1", graph1],
    ]),
  };
}

function mount(): { dash: Dashboard; root: HTMLElement } {
  document.body.innerHTML = "";
  const root = document.body;
  const make = (id: string) => {
    const el = document.createElement("div");
    el.id = id;
    root.appendChild(el);
    return el;
  };
  const dash = buildDashboard(
    {
      scatterplot: make("scatterplot"),
      coverage: make("coverage-plot"),
      interesting: make("interesting-plot"),
      generations: make("generations"),
      filter: make("filter-panel"),
    },
    fixtureData(),
  );
  return { dash, root };
}

const visiblePointKeys = (root: HTMLElement) =>
  [...root.querySelectorAll<SVGCircleElement>(".point")]
    .filter((c) => c.style.display !== "none")
    .map((c) => c.getAttribute("data-key"))
    .sort();

const selectedPointKeys = (root: HTMLElement) =>
  [...root.querySelectorAll(".point.sel")].map((c) => c.getAttribute("data-key")).sort();

const lineKeys = (root: HTMLElement, plot: string) =>
  [...root.querySelectorAll(`.${plot} .selline`)]
    .map((l) => l.getAttribute("data-key"))
    .sort();

const borderedIds = (root: HTMLElement) =>
  [...root.querySelectorAll(".gnode.bordered")]
    .map((g) => Number(g.getAttribute("data-id")))
    .sort((a, b) => a - b);

const filledIds = (root: HTMLElement) =>
  [...root.querySelectorAll(".gnode.filled")]
    .map((g) => Number(g.getAttribute("data-id")))
    .sort((a, b) => a - b);

beforeEach(() => {
  vi.stubGlobal("fetch", vi.fn());
});

describe("linked-view closure", () => {
  it("brushing a known region selects the expected set and marks every view", () => {
    const { dash, root } = mount();
    // Data-space rectangle covering exactly fuzz0/0 (-49.1,-26.6) and
    // fuzz1/1 (-5.5, 90.3) in the bundled embedding.
    dash.scatterplot.applyBrush([-60, -40], [0, 100]);

    const expected = [keyOf("fuzz0", 0), keyOf("fuzz1", 1)].sort();
    expect([...dash.store.snapshot().selected].sort()).toEqual(expected);
    expect(selectedPointKeys(root)).toEqual(expected);
    expect(lineKeys(root, "coverage-plot")).toEqual(expected);
    expect(lineKeys(root, "interesting-plot")).toEqual(expected);
    // The graph shows fuzz0: exactly the fuzz0 member of the selection.
    expect(borderedIds(root)).toEqual([0]);
    expect(fetch).not.toHaveBeenCalled();
  });

  it("vertical lines sit at the discovery times, colored by owner", () => {
    const { dash, root } = mount();
    dash.scatterplot.applyBrush([-60, -40], [0, 100]);
    const lines = [...root.querySelectorAll<SVGLineElement>(".coverage-plot .selline")];
    expect(lines).toHaveLength(2);
    const byKey = Object.fromEntries(lines.map((l) => [l.getAttribute("data-key"), l]));
    const strokes = new Set(lines.map((l) => l.getAttribute("stroke")));
    expect(strokes.size).toBe(2); // two owners, two colors
    expect(byKey[keyOf("fuzz0", 0)]).toBeDefined();
  });

  it("brushing an empty region clears the selection in all views", () => {
    const { dash, root } = mount();
    dash.scatterplot.applyBrush([-60, -40], [0, 100]);
    expect(dash.store.snapshot().selected.size).toBe(2);
    dash.scatterplot.applyBrush([10000, 10000], [10001, 10001]);
    expect(dash.store.snapshot().selected.size).toBe(0);
    expect(selectedPointKeys(root)).toEqual([]);
    expect(lineKeys(root, "coverage-plot")).toEqual([]);
    expect(lineKeys(root, "interesting-plot")).toEqual([]);
    expect(borderedIds(root)).toEqual([]);
  });

  it("toggling a fuzzer removes its marks from all views without refetching", () => {
    const { dash, root } = mount();
    dash.scatterplot.applyBrush([-60, -40], [0, 100]);
    dash.filterPanel.toggleFuzzer("fuzz1");

    expect(visiblePointKeys(root).every((k) => k!.startsWith("fuzz0/"))).toBe(true);
    const series = [...root.querySelectorAll(".coverage-plot path.series")].map((p) =>
      p.getAttribute("data-fuzzer"),
    );
    expect(series).toEqual(["fuzz0"]);
    // Selection pruned to the surviving fuzzer; so are the vertical lines.
    expect(lineKeys(root, "coverage-plot")).toEqual([keyOf("fuzz0", 0)]);
    expect(lineKeys(root, "interesting-plot")).toEqual([keyOf("fuzz0", 0)]);
    expect(fetch).not.toHaveBeenCalled();

    // Toggling back restores the marks, still without a request.
    dash.filterPanel.toggleFuzzer("fuzz1");
    expect(
      [...root.querySelectorAll(".coverage-plot path.series")].map((p) =>
        p.getAttribute("data-fuzzer"),
      ).sort(),
    ).toEqual(["fuzz0", "fuzz1"]);
    expect(fetch).not.toHaveBeenCalled();
  });

  it("hiding the only visible fuzzer leaves empty views, no errors", () => {
    const { dash, root } = mount();
    dash.filterPanel.toggleFuzzer("fuzz0");
    dash.filterPanel.toggleFuzzer("fuzz1");
    expect(visiblePointKeys(root)).toEqual([]);
    expect(root.querySelectorAll(".coverage-plot path.series")).toHaveLength(0);
    expect(root.querySelectorAll(".gnode")).toHaveLength(0);
  });

  it("time range filtering hides points and truncates graph nodes in place", () => {
    const { dash, root } = mount();
    dash.filterPanel.setRange(0, 3.0);
    // fuzz0 testcases at 0.293..2.937 survive; 4.875 pair does not; fuzz1
    // keeps 2.277 only.
    expect(visiblePointKeys(root)).toEqual(
      [
        keyOf("fuzz0", 0),
        keyOf("fuzz0", 1),
        keyOf("fuzz0", 2),
        keyOf("fuzz0", 3),
        keyOf("fuzz1", 0),
      ].sort(),
    );
    const nodeIds = [...root.querySelectorAll(".gnode")].map((g) =>
      Number(g.getAttribute("data-id")),
    );
    expect(nodeIds.sort((a, b) => a - b)).toEqual([0, 1, 2, 3]);
    expect(fetch).not.toHaveBeenCalled();
  });

  it("selection cannot outlive the filters that made it visible", () => {
    const { dash } = mount();
    dash.scatterplot.applyBrush([-60, -40], [0, 100]);
    dash.filterPanel.setRange(2.0, 3.0); // fuzz0/0 at 0.293 now hidden
    const remaining = [...dash.store.snapshot().selected];
    expect(remaining.every((k) => dash.store.isVisibleKey(k))).toBe(true);
  });
});

describe("generations graph", () => {
  it("click selection propagates to the scatterplot and back", () => {
    const { dash, root } = mount();
    dash.generations.clickNode(3);
    expect(selectedPointKeys(root)).toEqual([keyOf("fuzz0", 3)]);
    expect(borderedIds(root)).toEqual([3]);
    dash.generations.clickNode(3); // toggle off
    expect(borderedIds(root)).toEqual([]);
  });

  it("hover lowlights everything except the node and its neighbors", () => {
    const { dash, root } = mount();
    // fuzz0 edges: 0-1, 0-2, 0-4, 0-5, 2-3, 2-4; neighbors of 2 are {0, 3, 4}.
    dash.generations.hoverNode(2);
    const low = [...root.querySelectorAll(".gnode.lowlight")].map((g) =>
      Number(g.getAttribute("data-id")),
    );
    expect(low.sort((a, b) => a - b)).toEqual([1, 5]);
    dash.generations.hoverNode(null);
    expect(root.querySelectorAll(".gnode.lowlight")).toHaveLength(0);
  });

  it("splice parents render as distinct extra links", () => {
    const { root } = mount();
    // Node 4 has two parents (0 and 2): one tree link, one splice link.
    const splice = [...root.querySelectorAll(".splice-link")].map((p) =>
      p.getAttribute("data-edge"),
    );
    expect(splice.length).toBeGreaterThan(0);
    for (const edge of splice) expect(edge!.endsWith("-4")).toBe(true);
  });

  it("compare on the owner disables the overlay with a visible notice", () => {
    const { dash, root } = mount();
    dash.store.setCompare("fuzz0");
    expect(filledIds(root)).toEqual([]);
    expect(root.querySelector(".graph-notice")!.textContent).toContain("overlay disabled");
  });
});

describe("overlay correctness against the server highlight set", () => {
  it("filled nodes equal the API's highlighted set for the same query", () => {
    const { dash, root } = mount();
    // Reproduce the golden request: until=9.0, compare=fuzz1, graph fuzz0.
    dash.filterPanel.setRange(0, 9.0);
    dash.store.setCompare("fuzz1");
    expect(filledIds(root)).toEqual(graphOverlayGolden.highlighted);
    expect([...dash.generations.overlaySet()].sort((a, b) => a - b)).toEqual(
      graphOverlayGolden.highlighted,
    );
  });
});
