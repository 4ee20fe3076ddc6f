/**
 * Entry point. The service base URL comes from, in priority order, the
 * ?service= query parameter, a window.SHIFTBENCH_API global set before
 * this script loads, or the page's own origin. The participant id comes
 * from ?participant= or a prompt.
 */

import { StudyApi } from "./api.js";
import { App } from "./ui.js";

declare global {
  interface Window {
    SHIFTBENCH_API?: string;
  }
}

function serviceBaseUrl(): string {
  const params = new URLSearchParams(window.location.search);
  return params.get("service") ?? window.SHIFTBENCH_API ?? window.location.origin;
}

function participantId(): string | null {
  const params = new URLSearchParams(window.location.search);
  const fromQuery = params.get("participant");
  if (fromQuery) return fromQuery;
  return window.prompt("Please enter your participant id:");
}

const root = document.getElementById("app");
if (!root) {
  throw new Error("missing #app container");
}
const participant = participantId();
if (!participant) {
  root.textContent = "A participant id is required to take part.";
} else {
  void new App(root, new StudyApi(serviceBaseUrl())).run(participant);
}
