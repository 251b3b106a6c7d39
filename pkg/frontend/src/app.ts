/** Wiring: upload -> tune/decompose controls -> component gallery ->
 * raw-vs-clean overlay. Every number displayed comes from the server. */

import { ApiClient } from "./api.js";
import { renderLinePlot, tuneSurfaceSeries } from "./charts.js";
import { renderGallery } from "./gallery.js";
import { parseLayoutCsv } from "./heatmap.js";
import {
  applyAcknowledgedSelection,
  AppState,
  initialState,
  SortMode,
  toggledSelection,
} from "./state.js";
import { ElectrodePosition, TuneResponse } from "./types.js";

const PALETTE = ["#1a4f8a", "#b32020", "#1b7837", "#8a4fa8", "#b36b00", "#4d4d4d"];

export class App {
  state: AppState = initialState();
  layout: ElectrodePosition[] | null = null;
  lastTune: TuneResponse | null = null;

  constructor(
    private root: HTMLElement,
    private client: ApiClient,
  ) {
    this.root.innerHTML = this.template();
    this.bind();
  }

  private template(): string {
    return `
      <header>
        <h1>functional component inspector</h1>
        <span id="status" class="status">no session</span>
      </header>
      <section class="controls">
        <label>signal CSV <input type="file" id="csv-file" accept=".csv,text/csv"></label>
        <label>basis p <input type="number" id="p" value="30" min="4"></label>
        <label>order <input type="number" id="order" value="4" min="1" max="8"></label>
        <button id="upload">fit</button>
        <button id="tune" disabled>tune</button>
        <label>lambda <input type="number" id="lambda" value="0" min="0" step="any"></label>
        <label>q <input type="number" id="q" value="2" min="1"></label>
        <button id="decompose" disabled>decompose</button>
        <label>sort by
          <select id="sort">
            <option value="rho">kurtosis</option>
            <option value="gaussian_distance">distance from gaussian</option>
          </select>
        </label>
        <label>electrode layout <input type="file" id="layout-file" accept=".csv,text/csv"></label>
      </section>
      <section id="tune-panel" class="panel" hidden>
        <h2>baseline CV surface <span id="tune-pick"></span></h2>
        <div id="tune-plot" class="plot"></div>
      </section>
      <section id="gallery" class="gallery"></section>
      <section id="overlay-panel" class="panel" hidden>
        <h2>raw vs cleaned
          <label>channel <select id="channel"></select></label>
        </h2>
        <div id="overlay" class="plot"></div>
      </section>
      <pre id="summary" class="summary"></pre>
    `;
  }

  private el<T extends HTMLElement>(id: string): T {
    return this.root.querySelector(`#${id}`) as T;
  }

  private setStatus(text: string): void {
    this.el<HTMLElement>("status").textContent = text;
  }

  private bind(): void {
    this.el<HTMLButtonElement>("upload").addEventListener("click", () => {
      void this.upload();
    });
    this.el<HTMLButtonElement>("tune").addEventListener("click", () => {
      void this.tune();
    });
    this.el<HTMLButtonElement>("decompose").addEventListener("click", () => {
      void this.decompose();
    });
    this.el<HTMLSelectElement>("sort").addEventListener("change", (ev) => {
      this.state.sortMode = (ev.target as HTMLSelectElement).value as SortMode;
      this.renderCards();
    });
    this.el<HTMLSelectElement>("channel").addEventListener("change", (ev) => {
      this.state.overlayChannel = Number((ev.target as HTMLSelectElement).value);
      void this.refreshOverlay();
    });
    this.el<HTMLInputElement>("layout-file").addEventListener("change", (ev) => {
      const file = (ev.target as HTMLInputElement).files?.[0];
      if (!file) return;
      void file.text().then((text) => {
        this.layout = parseLayoutCsv(text);
        this.renderCards();
      });
    });
  }

  async upload(csvText?: string): Promise<void> {
    const text =
      csvText ?? (await this.el<HTMLInputElement>("csv-file").files?.[0]?.text());
    if (!text) {
      this.setStatus("choose a CSV first");
      return;
    }
    const p = Number(this.el<HTMLInputElement>("p").value);
    const order = Number(this.el<HTMLInputElement>("order").value);
    const info = await this.client.createSession(text, p, order);
    this.state.session = info;
    this.state.components = null;
    this.state.selection = new Set();
    this.setStatus(`session ${info.session_id}: ${info.n_curves} curves, p=${info.p}`);
    this.el<HTMLButtonElement>("tune").disabled = false;
    this.el<HTMLButtonElement>("decompose").disabled = false;
    const channel = this.el<HTMLSelectElement>("channel");
    channel.innerHTML = info.labels
      .map((lab, i) => `<option value="${i + 1}">${lab}</option>`)
      .join("");
  }

  async tune(): Promise<void> {
    this.setStatus("tuning...");
    const res = await this.client.tune();
    this.lastTune = res;
    this.el<HTMLInputElement>("lambda").value = String(res.lambda_star);
    this.el<HTMLInputElement>("q").value = String(res.q_star);
    const panel = this.el<HTMLElement>("tune-panel");
    panel.hidden = false;
    this.el<HTMLElement>("tune-pick").textContent =
      `(j0=${res.j0}, q*=${res.q_star}, lambda*=${res.lambda_star})`;
    renderLinePlot(
      this.el<HTMLElement>("tune-plot"),
      tuneSurfaceSeries(res.lambda_grid, res.bcv, PALETTE),
      { width: 560, height: 180 },
    );
    this.setStatus("tuned");
  }

  async decompose(): Promise<void> {
    this.state.lambda = Number(this.el<HTMLInputElement>("lambda").value);
    this.state.q = Number(this.el<HTMLInputElement>("q").value);
    this.setStatus("decomposing...");
    await this.client.decompose(this.state.lambda, this.state.q);
    this.state.selection = new Set();
    await this.refreshComponents();
    this.el<HTMLElement>("overlay-panel").hidden = false;
    await this.refreshOverlay();
    await this.refreshSummary();
    this.setStatus(`decomposed at lambda=${this.state.lambda}, q=${this.state.q}`);
  }

  async refreshComponents(): Promise<void> {
    this.state.components = await this.client.getComponents();
    this.state.selection = new Set(
      this.state.components.components.filter((c) => c.selected).map((c) => c.index),
    );
    this.renderCards();
  }

  renderCards(): void {
    renderGallery(this.el<HTMLElement>("gallery"), this.state, this.layout, {
      onToggle: (index) => void this.toggle(index),
    });
  }

  /** One queued PUT per click; flags update only from the server's ack. */
  async toggle(index: number): Promise<void> {
    const wanted = toggledSelection(this.state.selection, index);
    const ack = await this.client.setSelection(wanted);
    applyAcknowledgedSelection(this.state, ack.indices);
    this.renderCards();
    await this.refreshOverlay();
  }

  async refreshOverlay(): Promise<void> {
    if (!this.state.components) return;
    const ch = this.state.overlayChannel;
    const raw = await this.client.getCleaned([ch], true);
    const cleaned = await this.client.getCleaned([ch], false);
    renderLinePlot(
      this.el<HTMLElement>("overlay"),
      [
        { x: raw.times, y: raw.curves[0].values, color: "#9aa7b5", label: "raw" },
        {
          x: cleaned.times,
          y: cleaned.curves[0].values,
          color: "#b32020",
          width: 1.6,
          label: "cleaned",
        },
      ],
      { width: 560, height: 200 },
    );
  }

  async refreshSummary(): Promise<void> {
    const s = await this.client.getSummary();
    this.el<HTMLElement>("summary").textContent = JSON.stringify(s, null, 1);
  }
}

export function boot(root: HTMLElement, baseUrl = ""): App {
  return new App(root, new ApiClient(baseUrl));
}
