// Selection state, request construction, submission, and session history.
// Pure of DOM concerns so the combination logic is testable headless.

import { ApiClient, encodeCombineRequest } from "./api.js";
import type {
  CombineRequest,
  CombineResponse,
  HistoryEntry,
  Method,
  SystemEntry,
} from "./types.js";

/** Parse a rank-interval expression into 1-based half-open (i, k).
 * "m[:3]" is the top 3 -> [1, 4); "m[2:4]" -> [2, 4); "m[1:]" and "all"
 * select every system. */
export function parseIntervalExpr(expr: string, m: number): [number, number] {
  const text = expr.trim();
  if (text === "all") return [1, m + 1];
  const match = /^m\[(\d*):(\d*)\]$/.exec(text);
  if (!match) throw new Error(`cannot parse interval ${expr}`);
  const [, left, right] = match;
  if (left && right) return [parseInt(left, 10), parseInt(right, 10)];
  if (left) return [parseInt(left, 10), m + 1];
  if (right) return [1, parseInt(right, 10) + 1];
  return [1, m + 1];
}

/** Ranks selected by an interval, for driving the checkbox column. */
export function ranksInInterval(i: number, k: number): number[] {
  const ranks: number[] = [];
  for (let r = i; r < k; r++) ranks.push(r);
  return ranks;
}

export interface StorageLike {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
}

const HISTORY_KEY = "nerspan-session-history";

export interface SubmitOutcome {
  response: CombineResponse;
  entry: HistoryEntry;
  stale: false;
}

export class BoardController {
  systems: SystemEntry[] = [];
  method: Method = "spanner";
  /** Interval mode when a chip is active; manual checkbox edits clear it
   * and switch the request to an explicit name list. */
  interval: [number, number] | null = null;
  selected = new Set<string>();
  history: HistoryEntry[] = [];
  busy = false;

  private seq = 0;
  private nextId = 1;

  constructor(
    readonly client: ApiClient,
    private readonly storage: StorageLike | null = null,
  ) {
    this.restoreHistory();
  }

  async loadSystems(): Promise<void> {
    const doc = await this.client.systems();
    this.systems = [...doc.systems].sort((a, b) => a.rank - b.rank);
    for (const name of [...this.selected]) {
      if (!this.systems.some((s) => s.name === name)) this.selected.delete(name);
    }
  }

  get bestSingleF1(): number {
    return this.systems.reduce((best, s) => Math.max(best, s.overall_f1), 0);
  }

  /** Shortcut chips offered for the current registry size. */
  chipExpressions(): string[] {
    const m = this.systems.length;
    const chips: string[] = [];
    for (const top of [2, 3, 5, 10]) {
      if (m >= top) chips.push(`m[:${top}]`);
    }
    if (m >= 2) chips.push("m[2:]");
    chips.push("all");
    return chips;
  }

  /** Activate a rank-interval chip: checks exactly the covered rows. */
  selectChip(expr: string): void {
    const [i, k] = parseIntervalExpr(expr, this.systems.length);
    if (!(1 <= i && i < k && k <= this.systems.length + 1)) {
      throw new Error(`interval ${expr} is out of range`);
    }
    this.interval = [i, k];
    this.selected = new Set(
      this.systems.filter((s) => i <= s.rank && s.rank < k).map((s) => s.name),
    );
  }

  /** Manual checkbox toggle; drops out of interval mode. */
  toggleSystem(name: string): void {
    this.interval = null;
    if (this.selected.has(name)) this.selected.delete(name);
    else this.selected.add(name);
  }

  setMethod(method: Method): void {
    this.method = method;
  }

  get submitDisabled(): boolean {
    return this.selected.size === 0 || this.busy;
  }

  /** The request the current selection stands for; null when empty. */
  buildRequest(): CombineRequest | null {
    if (this.selected.size === 0) return null;
    if (this.interval) {
      return { method: this.method, interval: this.interval };
    }
    const names = this.systems
      .filter((s) => this.selected.has(s.name))
      .map((s) => s.name);
    return { method: this.method, systems: names };
  }

  /** Issue the current selection. Responses superseded by a newer submit
   * are discarded (returns null). */
  async submit(): Promise<SubmitOutcome | null> {
    const request = this.buildRequest();
    if (!request) throw new Error("empty selection");
    return this.issue(encodeCombineRequest(request));
  }

  /** Re-issue a history entry's exact request body. */
  async replay(entryId: number): Promise<SubmitOutcome | null> {
    const entry = this.history.find((e) => e.id === entryId);
    if (!entry) throw new Error(`no history entry ${entryId}`);
    return this.issue(entry.requestBody);
  }

  private async issue(body: string): Promise<SubmitOutcome | null> {
    const ticket = ++this.seq;
    this.busy = true;
    try {
      const response = await this.client.combineRaw(body);
      if (ticket !== this.seq) return null; // superseded while in flight
      const entry: HistoryEntry = {
        id: this.nextId++,
        timestamp: new Date().toISOString(),
        requestBody: body,
        method: response.report.method as Method,
        systems: response.report.systems,
        overallF1: response.report.overall.f1,
        deltaVsBest: response.report.overall.f1 - this.bestSingleF1,
      };
      this.history.push(entry); // append-only within the session
      this.persistHistory();
      return { response, entry, stale: false };
    } finally {
      if (ticket === this.seq) this.busy = false;
    }
  }

  private persistHistory(): void {
    if (!this.storage) return;
    this.storage.setItem(HISTORY_KEY, JSON.stringify(this.history));
  }

  private restoreHistory(): void {
    if (!this.storage) return;
    const raw = this.storage.getItem(HISTORY_KEY);
    if (!raw) return;
    try {
      this.history = JSON.parse(raw) as HistoryEntry[];
      this.nextId = this.history.reduce((top, e) => Math.max(top, e.id), 0) + 1;
    } catch {
      this.history = [];
    }
  }
}
