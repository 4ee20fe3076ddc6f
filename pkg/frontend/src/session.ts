/**
 * Session state machine for one annotator.
 *
 * Progression is forward-only: an item must be rated and its judgment
 * acknowledged by the service before the next item appears. Transient
 * submission failures are retried (with the same payload, so the
 * service-side dedup makes retries safe); nothing is lost silently.
 */

import { ApiError, Assignment, AssignmentItem, StudyApi } from "./api.js";

export type Phase =
  | "instructions"
  | "rating"
  | "submitting"
  | "completed"
  | "already_participated"
  | "failed";

export interface SessionOptions {
  now?: () => number;
  sleep?: (ms: number) => Promise<void>;
  maxRetries?: number;
  retryDelayMs?: number;
}

const defaultSleep = (ms: number) => new Promise<void>((resolve) => setTimeout(resolve, ms));

export class Session {
  phase: Phase = "instructions";
  index = 0;
  selected: number | null = null;
  lastError: string | null = null;
  private shownAt = 0;
  private readonly now: () => number;
  private readonly sleep: (ms: number) => Promise<void>;
  private readonly maxRetries: number;
  private readonly retryDelayMs: number;

  private constructor(
    private readonly api: StudyApi,
    readonly assignment: Assignment,
    options: SessionOptions = {},
  ) {
    this.now = options.now ?? (() => Date.now());
    this.sleep = options.sleep ?? defaultSleep;
    this.maxRetries = options.maxRetries ?? 5;
    this.retryDelayMs = options.retryDelayMs ?? 750;
  }

  /** Fetch the participant's assignment and open the instruction screen. */
  static async start(
    api: StudyApi,
    participantId: string,
    options: SessionOptions = {},
  ): Promise<Session> {
    const assignment = await api.fetchAssignment(participantId);
    return new Session(api, assignment, options);
  }

  get items(): AssignmentItem[] {
    return this.assignment.items;
  }

  get current(): AssignmentItem {
    const item = this.items[this.index];
    if (!item) {
      throw new Error(`no item at index ${this.index}`);
    }
    return item;
  }

  get progress(): { position: number; total: number } {
    return { position: Math.min(this.index + 1, this.items.length), total: this.items.length };
  }

  /** Leave the instructions; the first item's response clock starts now. */
  beginItems(): void {
    if (this.phase !== "instructions") {
      throw new Error(`cannot begin items from phase ${this.phase}`);
    }
    this.phase = "rating";
    this.shownAt = this.now();
  }

  selectRating(rating: number): void {
    if (this.phase !== "rating") {
      throw new Error(`cannot rate in phase ${this.phase}`);
    }
    if (!Number.isInteger(rating) || rating < 1 || rating > 7) {
      throw new Error(`rating must be an integer in 1..7, got ${rating}`);
    }
    this.selected = rating;
  }

  get canSubmit(): boolean {
    return this.phase === "rating" && this.selected !== null;
  }

  /**
   * Post the selected rating, then advance (or complete on the last item).
   * Retries transient failures up to the configured limit; a duplicate-ack
   * from a retried request counts as success.
   */
  async submitAndAdvance(): Promise<Phase> {
    if (!this.canSubmit || this.selected === null) {
      throw new Error("a rating must be selected before advancing");
    }
    const item = this.current;
    const payload = {
      participant_id: this.assignment.participant_id,
      pair_id: item.pair_id,
      presentation_order: item.presentation_order,
      rating: this.selected,
      response_time_ms: Math.max(0, this.now() - this.shownAt),
    };
    this.phase = "submitting";
    let attempt = 0;
    for (;;) {
      try {
        await this.api.submitJudgment(payload);
        break;
      } catch (err) {
        if (err instanceof ApiError && err.kind === "transient" && attempt < this.maxRetries) {
          attempt += 1;
          await this.sleep(this.retryDelayMs * attempt);
          continue;
        }
        this.phase = "failed";
        this.lastError = err instanceof Error ? err.message : String(err);
        throw err;
      }
    }
    this.selected = null;
    if (this.index + 1 >= this.items.length) {
      this.phase = "completed";
    } else {
      this.index += 1;
      this.phase = "rating";
      this.shownAt = this.now();
    }
    return this.phase;
  }

  /** After an exhausted submission, go back to rating so the user can retry. */
  retryAfterFailure(): void {
    if (this.phase !== "failed") {
      throw new Error(`nothing to retry in phase ${this.phase}`);
    }
    this.phase = "rating";
    this.lastError = null;
  }

  /** Deterministic completion code shown on the final screen. */
  completionCode(): string {
    let hash = 2166136261;
    const seed = `${this.assignment.participant_id}:${this.items.length}`;
    for (let i = 0; i < seed.length; i += 1) {
      hash ^= seed.charCodeAt(i);
      hash = Math.imul(hash, 16777619) >>> 0;
    }
    return `SB-${hash.toString(36).toUpperCase().padStart(7, "0")}`;
  }
}
