// Wire types for the registry service API.

export type Method = "spanner" | "vm" | "vof1" | "vcf1";

export const METHODS: Method[] = ["spanner", "vm", "vof1", "vcf1"];

export const ATTRIBUTES = ["eCon", "sLen", "eLen", "oDen"] as const;
export type Attribute = (typeof ATTRIBUTES)[number];

export const BUCKETS = ["XS", "S", "L", "XL"] as const;
export type Bucket = (typeof BUCKETS)[number];

export interface SystemEntry {
  name: string;
  rank: number;
  overall_f1: number;
  class_f1: Record<string, number>;
  file?: string;
}

export interface SystemsResponse {
  corpus: string;
  train_corpus: string | null;
  checkpoint: string | null;
  methods: string[];
  systems: SystemEntry[];
}

// Exactly one of systems / interval is present. The interval is 1-based
// half-open over descending-F1 ranks: [1, 4) selects the top 3.
export interface CombineRequest {
  method: Method;
  systems?: string[];
  interval?: [number, number];
}

export interface ScoreBlock {
  precision: number;
  recall: number;
  f1: number;
  gold: number;
  predicted: number;
  correct: number;
}

export interface BucketScore {
  f1: number | null;
  gold: number;
  predicted: number;
  correct: number;
}

export interface CombineReport {
  method: string;
  systems: string[];
  overall: ScoreBlock;
  per_class: Record<string, ScoreBlock>;
  buckets: Record<string, Record<string, BucketScore>>;
}

export interface CombineResponse {
  report: CombineReport;
  elapsed_seconds: number;
}

export interface BucketDiffResponse {
  attribute: string;
  a: string;
  b: string;
  diff: Record<string, number>;
  a_buckets: Record<string, BucketScore>;
  b_buckets: Record<string, BucketScore>;
}

export interface HealthResponse {
  status: string;
  service: string;
  version: string;
  systems: number;
  has_checkpoint: boolean;
}

export interface HistoryEntry {
  id: number;
  timestamp: string;
  requestBody: string; // the exact JSON string that went over the wire
  method: Method;
  systems: string[];
  overallF1: number;
  deltaVsBest: number;
}
