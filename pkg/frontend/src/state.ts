import { ApiClient, ApiError } from "./api";
import type { ExtractResponse, View } from "./types";

export interface UiState {
  article: string;
  selectedModel: string;
  maxTokens: number;
  maxTokensLimit: number;
  view: View;
  lastResponse: ExtractResponse | null;
  busy: boolean;
  error: string | null;
}

const INITIAL: UiState = {
  article: "",
  selectedModel: "",
  maxTokens: 512,
  maxTokensLimit: 4096,
  view: "raw",
  lastResponse: null,
  busy: false,
  error: null,
};

/**
 * Single-in-flight submit plus view switching. All three views render from
 * lastResponse; switching views never touches the network.
 */
export class UiController {
  state: UiState = { ...INITIAL };

  constructor(
    private api: ApiClient,
    private onChange: (state: UiState) => void = () => undefined,
  ) {}

  private update(patch: Partial<UiState>): void {
    this.state = { ...this.state, ...patch };
    this.onChange(this.state);
  }

  setArticle(article: string): void {
    this.update({ article });
  }

  selectModel(id: string): void {
    this.update({ selectedModel: id });
  }

  setMaxTokens(value: number): void {
    this.update({ maxTokens: this.clampTokens(value) });
  }

  /** Server-reported bound; the slider value is clamped into it. */
  setMaxTokensLimit(limit: number): void {
    this.update({ maxTokensLimit: limit, maxTokens: Math.min(this.state.maxTokens, limit) });
  }

  private clampTokens(value: number): number {
    return Math.max(1, Math.min(this.state.maxTokensLimit, Math.round(value)));
  }

  get canSubmit(): boolean {
    return !this.state.busy && this.state.article.trim() !== "" &&
      this.state.selectedModel !== "";
  }

  setView(view: View): void {
    this.update({ view });
  }

  async submit(): Promise<void> {
    if (!this.canSubmit) return; // busy guard: double submit sends one request
    this.update({ busy: true, error: null });
    try {
      const response = await this.api.extract({
        article: this.state.article,
        model: this.state.selectedModel,
        max_tokens: this.state.maxTokens,
      });
      this.update({ busy: false, lastResponse: response });
    } catch (error) {
      const message = error instanceof ApiError
        ? error.message
        : `network failure: ${String(error)}`;
      this.update({ busy: false, error: message });
    }
  }
}
