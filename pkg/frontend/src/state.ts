/** App state: server snapshots plus the pending-selection bookkeeping.
 * Selected flags only flip after the server acknowledges the PUT. */

import { ComponentsResponse, SessionInfo } from "./types.js";

export type SortMode = "rho" | "gaussian_distance";

export interface AppState {
  session: SessionInfo | null;
  components: ComponentsResponse | null;
  selection: Set<number>;
  sortMode: SortMode;
  overlayChannel: number;
  lambda: number;
  q: number;
}

export function initialState(): AppState {
  return {
    session: null,
    components: null,
    selection: new Set(),
    sortMode: "rho",
    overlayChannel: 1,
    lambda: 0,
    q: 2,
  };
}

/** Next selection if the given 1-based component were toggled. */
export function toggledSelection(selection: Set<number>, index: number): number[] {
  const next = new Set(selection);
  if (next.has(index)) next.delete(index);
  else next.add(index);
  return [...next].sort((a, b) => a - b);
}

export function applyAcknowledgedSelection(state: AppState, indices: number[]): void {
  state.selection = new Set(indices);
  if (state.components) {
    for (const card of state.components.components) {
      card.selected = state.selection.has(card.index);
    }
  }
}

export function sortedCards(state: AppState) {
  if (!state.components) return [];
  const cards = [...state.components.components];
  if (state.sortMode === "gaussian_distance") {
    cards.sort((a, b) => b.gaussian_distance - a.gaussian_distance);
  } else {
    cards.sort((a, b) => b.rho - a.rho);
  }
  return cards;
}
