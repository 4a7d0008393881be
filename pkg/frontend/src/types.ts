/** Payload shapes of the analysis API (mirrors the server's JSON schemas). */

export interface FuzzerInfo {
  id: string;
  name: string;
  color: string | null;
}

export interface Meta {
  schema: string;
  fuzzers: FuzzerInfo[];
  horizon_s: number;
  map_size: number;
  bucketing: string;
  has_embedding: boolean;
}

export interface TestcaseInfo {
  id: number;
  time: number;
  parents: number[];
  op: string | null;
  crashed: boolean;
  timed_out: boolean;
  flaky: boolean;
  exec_error: string | null;
}

export type CurvePoint = [number, number];

export interface AnalysisPayload {
  until: number;
  horizon_s: number;
  curves: Record<string, CurvePoint[]>;
  histogram: Record<string, Record<string, number>>;
  interestingness: Record<string, Record<string, string[]>>;
  testcases: Record<string, TestcaseInfo[]>;
}

export interface EmbeddingPoint {
  fuzzer: string;
  id: number;
  x: number;
  y: number;
}

export interface EmbeddingPayload {
  until: number;
  params: Record<string, unknown> | null;
  points: EmbeddingPoint[];
}

export interface GraphNode {
  id: number;
  time: number;
  op: string | null;
  level: number;
}

export interface GraphPayload {
  fuzzer: string;
  until: number;
  compare: string | null;
  nodes: GraphNode[];
  edges: [number, number][];
  highlighted: number[];
}
