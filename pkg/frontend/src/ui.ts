/**
 * DOM rendering. Sentences are only ever labeled "Sentence A" and
 * "Sentence B" in their served presentation order; nothing on screen
 * distinguishes attention checks or reveals which order is which.
 */

import { ApiError, StudyApi } from "./api.js";
import { Session, SessionOptions } from "./session.js";

const INSTRUCTIONS = `You will see ${""}pairs of sentences, A and B, that contain the same words
in a different order. For each pair, judge how natural the sentences sound
in relation to each other on a scale from 1 to 7:
1 means sentence A sounds far more natural than sentence B;
7 means sentence B sounds far more natural than sentence A.
There are no right or wrong answers. Please answer every item.`;

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export class App {
  constructor(
    private readonly root: HTMLElement,
    private readonly api: StudyApi,
    private readonly sessionOptions: SessionOptions = {},
  ) {}

  async run(participantId: string): Promise<void> {
    this.renderMessage("Loading your assignment…");
    let session: Session;
    try {
      session = await Session.start(this.api, participantId, this.sessionOptions);
    } catch (err) {
      if (err instanceof ApiError && err.kind === "conflict") {
        this.renderMessage("You have already completed this study. Thank you!");
      } else if (err instanceof ApiError && err.kind === "transient") {
        this.renderRetry(`The study service is not reachable (${err.message}).`, () =>
          this.run(participantId),
        );
      } else {
        this.renderMessage(`Something went wrong: ${String(err)}`);
      }
      return;
    }
    this.renderInstructions(session);
  }

  private clear(): HTMLElement {
    this.root.replaceChildren();
    return this.root;
  }

  private renderMessage(text: string): void {
    const root = this.clear();
    root.append(el("p", "message", text));
  }

  private renderRetry(text: string, retry: () => void): void {
    const root = this.clear();
    root.append(el("p", "message", text));
    const button = el("button", "primary", "Try again");
    button.addEventListener("click", retry);
    root.append(button);
  }

  private renderInstructions(session: Session): void {
    const root = this.clear();
    root.append(el("h1", undefined, "Sentence judgment study"));
    for (const line of INSTRUCTIONS.split("\n")) {
      root.append(el("p", "instructions", line));
    }
    const button = el("button", "primary", "Begin");
    button.addEventListener("click", () => {
      session.beginItems();
      this.renderItem(session);
    });
    root.append(button);
  }

  private renderItem(session: Session): void {
    const root = this.clear();
    const { position, total } = session.progress;
    root.append(el("p", "progress", `Item ${position} of ${total}`));

    const item = session.current;
    const cardA = el("div", "sentence");
    cardA.append(el("h2", undefined, "Sentence A"), el("p", undefined, item.sentence_a));
    const cardB = el("div", "sentence");
    cardB.append(el("h2", undefined, "Sentence B"), el("p", undefined, item.sentence_b));
    root.append(cardA, cardB);

    const submit = el("button", "primary", "Submit and continue");
    submit.disabled = true;

    const scale = el("div", "scale");
    const anchors = el("div", "anchors");
    anchors.append(
      el("span", undefined, "1 = A far more natural"),
      el("span", undefined, "7 = B far more natural"),
    );
    root.append(anchors);
    for (let rating = 1; rating <= 7; rating += 1) {
      const label = el("label", "rating");
      const radio = el("input");
      radio.type = "radio";
      radio.name = "rating";
      radio.value = String(rating);
      radio.addEventListener("change", () => {
        if (session.phase !== "rating") return; // ignore mid-submission clicks
        session.selectRating(rating);
        submit.disabled = !session.canSubmit;
      });
      label.append(radio, el("span", undefined, String(rating)));
      scale.append(label);
    }
    root.append(scale);

    const status = el("p", "status", "");
    submit.addEventListener("click", async () => {
      submit.disabled = true;
      status.textContent = "Submitting…";
      try {
        const phase = await session.submitAndAdvance();
        if (phase === "completed") {
          this.renderCompleted(session);
        } else {
          this.renderItem(session);
        }
      } catch (err) {
        status.textContent = `Submission failed: ${String(err)}. `;
        submit.disabled = false;
        const retry = el("button", "primary", "Retry submission");
        retry.addEventListener("click", () => {
          session.retryAfterFailure();
          submit.click();
        });
        status.append(retry);
      }
    });
    root.append(submit, status);
  }

  private renderCompleted(session: Session): void {
    const root = this.clear();
    root.append(el("h1", undefined, "All done. Thank you!"));
    root.append(el("p", undefined, "Your completion code:"));
    root.append(el("p", "code", session.completionCode()));
  }
}
