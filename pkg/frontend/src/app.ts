/**
 * Entry point: tab switching between the reader and renarrator views.
 * All state beyond form inputs lives on the server.
 */

import { ApiClient } from "./api.js";
import { ReaderView } from "./reader.js";
import { RenarratorView } from "./renarrator.js";

function mount(): void {
  const api = new ApiClient("");
  const tabs = document.getElementById("tabs")!;
  const outlet = document.getElementById("view")!;

  const views = {
    read: () => new ReaderView(outlet, api).render(),
    renarrate: () => new RenarratorView(outlet, api).render(),
  };

  const activate = (name: keyof typeof views) => {
    for (const button of tabs.querySelectorAll("button")) {
      button.classList.toggle("active", button.dataset.view === name);
    }
    outlet.textContent = "Loading...";
    views[name]().catch((problem: Error) => {
      outlet.textContent = `Could not reach the service: ${problem.message}`;
    });
  };

  tabs.addEventListener("click", (event) => {
    const button = (event.target as HTMLElement).closest("button");
    if (button?.dataset.view) activate(button.dataset.view as keyof typeof views);
  });

  activate("read");
}

document.addEventListener("DOMContentLoaded", mount);
