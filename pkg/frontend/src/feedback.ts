import { postFeedback, ApiFailure } from "./api.js";
import type { Verdict } from "./types.js";

// Mirrors the server-side rule: revise demands non-empty text;
// accept/reject stand on their own.
export function canSubmit(text: string, verdict: Verdict): boolean {
  return verdict !== "revise" || text.trim().length > 0;
}

export interface SubmitResult {
  ok: boolean;
  message: string;
}

export async function submitFeedback(
  runId: string, candidate: number, text: string, verdict: Verdict, base = "",
): Promise<SubmitResult> {
  if (!canSubmit(text, verdict)) {
    return { ok: false, message: "Feedback text is required to revise." };
  }
  try {
    await postFeedback(runId, candidate, text, verdict, base);
    return { ok: true, message: `Feedback sent (${verdict}); run resuming.` };
  } catch (err) {
    if (err instanceof ApiFailure && err.error.code === "NOT_AWAITING") {
      return { ok: false, message: "This run is not awaiting feedback." };
    }
    return { ok: false, message: String(err) };
  }
}
