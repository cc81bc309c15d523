// DOM wiring. All state transitions live in QueryController; this file
// only moves values between the controls and the rendered fragments.

import { fetchBankInfo } from "./api.js";
import { correctionTransform } from "./format.js";
import { renderAngle, renderBanner, renderHits, renderLatency } from "./render.js";
import { QueryController, UiState } from "./state.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

const fileInput = el<HTMLInputElement>("file");
const kInput = el<HTMLInputElement>("k");
const metricSelect = el<HTMLSelectElement>("metric");
const oadToggle = el<HTMLInputElement>("use-oad");
const banner = el<HTMLDivElement>("banner");
const preview = el<HTMLImageElement>("preview");
const angleOut = el<HTMLParagraphElement>("angle");
const latencyOut = el<HTMLParagraphElement>("latency");
const results = el<HTMLDivElement>("results");
const bankInfoOut = el<HTMLParagraphElement>("bank-info");

let previewUrl: string | null = null;

function sync(state: UiState): void {
  for (const control of [fileInput, kInput, metricSelect, oadToggle]) {
    control.disabled = state.loading;
  }
  document.body.classList.toggle("loading", state.loading);
  if (state.error) {
    banner.innerHTML = renderBanner(state.error);
    banner.hidden = false;
  } else {
    banner.hidden = true;
  }
  if (state.response) {
    results.innerHTML = renderHits(state.response.hits);
    angleOut.textContent = renderAngle(state.response, state.useOad);
    latencyOut.textContent = renderLatency(state.response.latency_ms);
    preview.style.transform = state.useOad
      ? correctionTransform(state.response.predicted_angle_deg)
      : "none";
  }
}

const controller = new QueryController("", fetch.bind(globalThis), sync);

fileInput.addEventListener("change", () => {
  const file = fileInput.files?.[0];
  if (!file) return;
  if (previewUrl) URL.revokeObjectURL(previewUrl);
  previewUrl = URL.createObjectURL(file);
  preview.src = previewUrl;
  preview.hidden = false;
  void controller.selectImage(file);
});

kInput.addEventListener("change", () => {
  void controller.setK(Number(kInput.value));
});

metricSelect.addEventListener("change", () => {
  void controller.setMetric(metricSelect.value);
});

oadToggle.addEventListener("change", () => {
  void controller.setUseOad(oadToggle.checked);
});

banner.addEventListener("click", (event) => {
  if ((event.target as HTMLElement).id !== "retry") return;
  void boot();
  void controller.submit();
});

async function boot(): Promise<void> {
  try {
    const info = await fetchBankInfo("");
    bankInfoOut.textContent =
      `${info.records} records · ${info.labels} labels · ` +
      `dim ${info.dim} · ${info.descriptor_id}`;
    banner.hidden = true;
  } catch {
    banner.innerHTML = renderBanner("service unreachable - is `ricb serve` running?");
    banner.hidden = false;
  }
}

void boot();
