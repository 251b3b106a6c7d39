/** Full UI round trip against the stateful fake service: upload, tune,
 * decompose, toggle a component (exactly one PUT), and verify the overlay
 * repaints from the server's cleaned values. */

import { beforeEach, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { App } from "../src/app.js";
import { FakeServer } from "./fakeServer.js";

function mount(server: FakeServer): App {
  document.body.innerHTML = '<div id="app"></div>';
  const root = document.getElementById("app") as HTMLElement;
  return new App(root, new ApiClient("", server.fetch));
}

function overlayPaths(): string[] {
  return [...document.querySelectorAll("#overlay svg path")].map(
    (p) => p.getAttribute("d") ?? "",
  );
}

describe("app integration", () => {
  let server: FakeServer;
  let app: App;

  beforeEach(async () => {
    server = new FakeServer({ q: 3, nChannels: 4 });
    app = mount(server);
    await app.upload("0,1,2\n3,4,5\n");
    (document.getElementById("q") as HTMLInputElement).value = "3";
    await app.decompose();
  });

  it("renders one card per component with descending rho", () => {
    const cards = [...document.querySelectorAll(".card")];
    expect(cards).toHaveLength(3);
    const rhos = cards.map((c) =>
      Number((c.querySelector(".rho") as HTMLElement).textContent!.replace("rho ", "")),
    );
    expect(rhos).toEqual([...rhos].sort((a, b) => b - a));
  });

  it("toggle issues exactly one PUT and marks the card from the ack", async () => {
    const before = server.log.filter((e) => e.method === "PUT").length;
    await app.toggle(2);
    const puts = server.log.filter((e) => e.method === "PUT");
    expect(puts.length - before).toBe(1);
    const card = document.querySelector('.card[data-index="2"]') as HTMLElement;
    expect(card.classList.contains("selected")).toBe(true);
    expect(server.selection).toEqual([2]);
  });

  it("overlay repaints with the server's cleaned values after a toggle", async () => {
    const before = overlayPaths();
    expect(before).toHaveLength(2); // raw + cleaned
    expect(before[0]).toBe(before[1]); // nothing selected yet
    const fetches = () =>
      server.log.filter((e) => e.path === "/sessions/s1/cleaned").length;
    const n0 = fetches();
    await app.toggle(1);
    const after = overlayPaths();
    expect(fetches()).toBe(n0 + 2); // raw + cleaned refetched
    expect(after[1]).not.toBe(after[0]); // cleaned now departs from raw
  });

  it("clicking a card button goes through the DOM handler", async () => {
    const btn = document.querySelector(
      '.card[data-index="3"] button.toggle',
    ) as HTMLButtonElement;
    btn.click();
    await app["client"]["queue"]; // drain the mutation queue
    await new Promise((r) => setTimeout(r, 0));
    expect(server.selection).toEqual([3]);
    const puts = server.log.filter((e) => e.method === "PUT");
    expect(puts).toHaveLength(1);
  });

  it("changing lambda re-decomposes and repopulates cards", async () => {
    (document.getElementById("lambda") as HTMLInputElement).value = "10";
    (document.getElementById("q") as HTMLInputElement).value = "2";
    await app.decompose();
    expect(server.q).toBe(2);
    expect(document.querySelectorAll(".card")).toHaveLength(2);
    const decomposes = server.log.filter((e) => e.path.endsWith("/decompose"));
    expect(decomposes.at(-1)?.body).toMatchObject({ lambda: 10, q: 2 });
  });

  it("tune fills the lambda/q inputs and draws the surface", async () => {
    await app.tune();
    expect((document.getElementById("lambda") as HTMLInputElement).value).toBe("10");
    expect((document.getElementById("q") as HTMLInputElement).value).toBe("2");
    expect(document.querySelectorAll("#tune-plot svg path")).toHaveLength(2);
  });

  it("stale revision from a concurrent writer is replayed transparently", async () => {
    server.revision += 3;
    await app.toggle(1);
    expect(server.selection).toEqual([1]);
    const card = document.querySelector('.card[data-index="1"]') as HTMLElement;
    expect(card.classList.contains("selected")).toBe(true);
  });
});
