/** Component cards: kurtosis value, channel-score strip (or scalp map),
 * time-course polyline, and a selection toggle. */

import { renderLinePlot } from "./charts.js";
import { drawChannelStrip, drawScalpMap } from "./heatmap.js";
import { AppState, sortedCards } from "./state.js";
import { ComponentCard, ElectrodePosition } from "./types.js";

export interface GalleryHandlers {
  onToggle(index: number): void;
}

function cardEl(
  doc: Document,
  card: ComponentCard,
  reference: number,
  layout: ElectrodePosition[] | null,
  handlers: GalleryHandlers,
): HTMLElement {
  const root = doc.createElement("div");
  root.className = "card" + (card.selected ? " selected" : "");
  root.dataset.index = String(card.index);

  const head = doc.createElement("div");
  head.className = "card-head";
  head.innerHTML =
    `<span class="comp-name">component ${card.index}</span>` +
    `<span class="rho" title="kurtosis eigenvalue (gaussian reference ${reference.toFixed(1)})">` +
    `rho ${card.rho.toFixed(3)}</span>`;
  root.appendChild(head);

  const map = doc.createElement("canvas");
  map.className = "scores";
  if (layout && layout.length === card.channel_scores.length) {
    map.width = 96;
    map.height = 96;
    drawScalpMap(map, card.channel_scores, layout);
  } else {
    map.width = 192;
    map.height = 14;
    drawChannelStrip(map, card.channel_scores);
  }
  root.appendChild(map);

  const line = doc.createElement("div");
  line.className = "timecourse";
  renderLinePlot(
    line,
    [{ x: card.times, y: card.psi, color: card.selected ? "#b32020" : "#1a4f8a" }],
    { width: 220, height: 56 },
  );
  root.appendChild(line);

  const toggle = doc.createElement("button");
  toggle.className = "toggle";
  toggle.textContent = card.selected ? "selected for removal" : "keep";
  toggle.addEventListener("click", () => handlers.onToggle(card.index));
  root.appendChild(toggle);
  return root;
}

export function renderGallery(
  container: HTMLElement,
  state: AppState,
  layout: ElectrodePosition[] | null,
  handlers: GalleryHandlers,
): void {
  const doc = container.ownerDocument;
  container.textContent = "";
  if (!state.components) return;
  const reference = state.components.gaussian_reference;
  for (const card of sortedCards(state)) {
    container.appendChild(cardEl(doc, card, reference, layout, handlers));
  }
}
