import { ApiClient } from "./api";
import {
  renderArticleView,
  renderJsonView,
  renderRawView,
  SpanBoundsError,
} from "./render";
import { UiController, UiState } from "./state";
import type { View } from "./types";

export interface AppHandle {
  controller: UiController;
  /** resolves once models and health have been loaded */
  ready: Promise<void>;
}

function byId<T extends HTMLElement>(doc: Document, id: string): T {
  const el = doc.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
}

/** Wire the static page to a controller. Exported so tests can drive it. */
export function initApp(doc: Document, api: ApiClient): AppHandle {
  const articleInput = byId<HTMLTextAreaElement>(doc, "article-input");
  const modelSelect = byId<HTMLSelectElement>(doc, "model-select");
  const slider = byId<HTMLInputElement>(doc, "max-tokens");
  const sliderValue = byId<HTMLElement>(doc, "max-tokens-value");
  const submitButton = byId<HTMLButtonElement>(doc, "submit");
  const output = byId<HTMLElement>(doc, "output");
  const errorBanner = byId<HTMLElement>(doc, "error-banner");
  const viewButtons: Record<View, HTMLButtonElement> = {
    raw: byId<HTMLButtonElement>(doc, "view-raw"),
    json: byId<HTMLButtonElement>(doc, "view-json"),
    article: byId<HTMLButtonElement>(doc, "view-article"),
  };

  const renderOutput = (state: UiState): string => {
    if (!state.lastResponse) return '<p class="notice">no output yet</p>';
    switch (state.view) {
      case "raw":
        return renderRawView(state.lastResponse);
      case "json":
        return renderJsonView(state.lastResponse);
      case "article":
        return renderArticleView(state.lastResponse);
    }
  };

  const apply = (state: UiState): void => {
    submitButton.disabled = !controller.canSubmit;
    errorBanner.textContent = state.error ?? "";
    errorBanner.hidden = state.error === null;
    sliderValue.textContent = String(state.maxTokens);
    slider.value = String(state.maxTokens);
    slider.max = String(state.maxTokensLimit);
    for (const [view, button] of Object.entries(viewButtons)) {
      button.classList.toggle("active", view === state.view);
    }
    try {
      output.innerHTML = renderOutput(state);
    } catch (error) {
      if (error instanceof SpanBoundsError) {
        errorBanner.hidden = false;
        errorBanner.textContent = `cannot render highlights: ${error.message}`;
        output.innerHTML = "";
      } else {
        throw error;
      }
    }
  };

  const controller = new UiController(api, apply);

  articleInput.addEventListener("input", () => controller.setArticle(articleInput.value));
  modelSelect.addEventListener("change", () => controller.selectModel(modelSelect.value));
  slider.addEventListener("input", () => controller.setMaxTokens(Number(slider.value)));
  submitButton.addEventListener("click", () => void controller.submit());
  for (const [view, button] of Object.entries(viewButtons)) {
    button.addEventListener("click", () => controller.setView(view as View));
  }

  const ready = (async () => {
    const models = await api.getModels();
    modelSelect.innerHTML = "";
    for (const model of models) {
      const option = doc.createElement("option");
      option.value = model.id;
      option.textContent = model.display_name;
      modelSelect.appendChild(option);
    }
    if (models.length > 0) controller.selectModel(models[0].id);
    const health = await api.getHealth();
    controller.setMaxTokensLimit(health.max_tokens_limit);
  })();

  apply(controller.state);
  return { controller, ready };
}
