/**
 * Typed client for the study-service HTTP API.
 *
 * Error classification drives the session's retry behavior: "transient"
 * failures (network errors, 5xx) may be retried, a 409 on judgment
 * submission is a duplicate-ack and counts as success, and a 409 on
 * assignment fetch means this participant already has an assignment.
 */

export type PresentationOrder = "unshifted_first" | "shifted_first";

export interface AssignmentItem {
  pair_id: string;
  presentation_order: PresentationOrder;
  is_attention_check: boolean;
  sentence_a: string;
  sentence_b: string;
}

export interface Assignment {
  participant_id: string;
  items: AssignmentItem[];
  issued_at: string;
}

export interface JudgmentPayload {
  participant_id: string;
  pair_id: string;
  presentation_order: PresentationOrder;
  rating: number;
  response_time_ms: number;
}

export type ApiErrorKind = "conflict" | "transient" | "fatal";

export class ApiError extends Error {
  constructor(message: string, readonly kind: ApiErrorKind, readonly status?: number) {
    super(message);
    this.name = "ApiError";
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

async function detail(response: Response): Promise<string> {
  try {
    const body = (await response.json()) as { detail?: string };
    return body.detail ?? response.statusText;
  } catch {
    return response.statusText;
  }
}

export class StudyApi {
  constructor(
    readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private url(path: string): string {
    return this.baseUrl.replace(/\/$/, "") + path;
  }

  async fetchAssignment(participantId: string): Promise<Assignment> {
    let response: Response;
    try {
      response = await this.fetchFn(
        this.url(`/api/assignment?participant=${encodeURIComponent(participantId)}`),
      );
    } catch (err) {
      throw new ApiError(`service unreachable: ${String(err)}`, "transient");
    }
    if (response.status === 409) {
      throw new ApiError(await detail(response), "conflict", 409);
    }
    if (response.status >= 500) {
      throw new ApiError(await detail(response), "transient", response.status);
    }
    if (!response.ok) {
      throw new ApiError(await detail(response), "fatal", response.status);
    }
    return (await response.json()) as Assignment;
  }

  /** Submit one judgment; resolves on 201 and on duplicate-ack (409). */
  async submitJudgment(payload: JudgmentPayload): Promise<void> {
    let response: Response;
    try {
      response = await this.fetchFn(this.url("/api/judgments"), {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(payload),
      });
    } catch (err) {
      throw new ApiError(`service unreachable: ${String(err)}`, "transient");
    }
    if (response.status === 201 || response.status === 409) {
      return; // 409 = the service already stored this judgment
    }
    if (response.status >= 500) {
      throw new ApiError(await detail(response), "transient", response.status);
    }
    throw new ApiError(await detail(response), "fatal", response.status);
  }
}
