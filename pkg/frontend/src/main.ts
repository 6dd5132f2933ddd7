// Entry point: pick a fixture, start a session, hand off to the app.

import { SessionApi } from "./api.js";
import { ConsoleApp } from "./app.js";

function serviceBase(): string {
  const fromQuery = new URLSearchParams(window.location.search).get("service");
  return fromQuery ?? "http://127.0.0.1:8008";
}

async function boot(): Promise<void> {
  const picker = document.getElementById("fixture") as HTMLSelectElement;
  const startButton = document.getElementById("start") as HTMLButtonElement;
  const mount = document.getElementById("app") as HTMLElement;

  const api = new SessionApi(serviceBase());
  const app = new ConsoleApp(api, mount);

  try {
    for (const name of await api.listFixtures()) {
      const option = document.createElement("option");
      option.value = name;
      option.textContent = name;
      picker.appendChild(option);
    }
  } catch (error) {
    mount.textContent = `cannot reach the service at ${api.base}: ${error}`;
    return;
  }

  startButton.addEventListener("click", () => {
    void app.start({ fixture: picker.value });
  });
}

void boot();
