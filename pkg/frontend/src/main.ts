import { health } from "./api.js";
import { SearchController } from "./controller.js";
import { SearchView } from "./view.js";

function required<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing #${id}`);
  return el as T;
}

const input = required<HTMLInputElement>("search-input");
const view = new SearchView(
  {
    results: required("results"),
    banner: required("banner"),
    status: required("status"),
  },
  (name) => {
    // clicking a result fills the input with the exact catalog name,
    // driving the similarity to 1
    input.value = name;
    controller.onInput(name);
    input.focus();
  }
);
const controller = new SearchController(view);

input.addEventListener("input", () => controller.onInput(input.value));

void health()
  .then((h) => {
    required("catalog-size").textContent =
      `${h.catalog_size} products indexed`;
  })
  .catch(() => {
    required("catalog-size").textContent = "API unreachable";
  });
