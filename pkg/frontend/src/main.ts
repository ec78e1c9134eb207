// Bootstrap: read the service base URL (?api=... overrides, persisted in
// localStorage), load the system table, and mount the board.

import { ApiClient } from "./api.js";
import { BoardController } from "./board.js";
import { mountApp } from "./ui.js";

const API_KEY = "nerspan-api-base";

function baseUrl(): string {
  const fromQuery = new URLSearchParams(location.search).get("api");
  if (fromQuery) {
    localStorage.setItem(API_KEY, fromQuery);
    return fromQuery;
  }
  return localStorage.getItem(API_KEY) ?? "http://127.0.0.1:8570";
}

async function start(): Promise<void> {
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app element");
  const client = new ApiClient(baseUrl());
  const board = new BoardController(client, sessionStorage);
  const view = mountApp(root, board);
  try {
    await board.loadSystems();
    view.refresh();
  } catch (err) {
    view.showError(
      `service unreachable at ${client.baseUrl}: `
        + (err instanceof Error ? err.message : String(err)),
      () => void start(),
    );
  }
}

void start();
