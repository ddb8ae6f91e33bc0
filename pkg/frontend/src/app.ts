/**
 * DOM wiring for the wireframe composer: a phone-shaped canvas the designer
 * drags boxes onto, a class palette, a K slider, and the ranked results
 * gallery. All editing logic lives in state.ts; this file only translates
 * pointer/keyboard events and paints.
 */
import { ApiClient, ApiError } from "./client.js";
import { renderCommands, type RectCommand } from "./render.js";
import { COMPONENT_CLASSES, type ComponentClassName, type Palette, type QueryResult } from "./schema.js";
import {
  CANVAS_H,
  CANVAS_W,
  deleteElement,
  emptyState,
  loadLayout,
  placeElement,
  resizeElement,
  selectElement,
  selectedIndex,
  classifyElement,
  toQueryBody,
  undo,
  type EditorState,
} from "./state.js";

const SERVICE_URL =
  new URLSearchParams(window.location.search).get("service") ?? "http://127.0.0.1:8000";

const client = new ApiClient(SERVICE_URL);

let state: EditorState = emptyState();
let palette: Palette | null = null;
let currentClass: ComponentClassName = "text";
let drag: { x0: number; y0: number; resizing: number | null } | null = null;

const canvas = document.getElementById("editor") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const classBar = document.getElementById("class-bar")!;
const results = document.getElementById("results")!;
const banner = document.getElementById("banner")!;
const queryButton = document.getElementById("query") as HTMLButtonElement;
const undoButton = document.getElementById("undo") as HTMLButtonElement;
const deleteButton = document.getElementById("delete") as HTMLButtonElement;
const kSlider = document.getElementById("k") as HTMLInputElement;
const kLabel = document.getElementById("k-label")!;

function setState(next: EditorState): void {
  state = next;
  paint();
}

function showError(message: string, retry: boolean): void {
  banner.textContent = message;
  banner.classList.remove("hidden");
  banner.classList.toggle("retry", retry);
}

function clearError(): void {
  banner.classList.add("hidden");
}

function cssFor(cls: ComponentClassName): string {
  if (!palette) return "#888";
  const entry = palette.classes.find((c) => c.name === cls);
  if (!entry) return "#888";
  const [r, g, b] = entry.color;
  return `rgb(${Math.round(r * 255)},${Math.round(g * 255)},${Math.round(b * 255)})`;
}

function paint(): void {
  ctx.fillStyle = palette
    ? `rgb(${palette.background.map((v) => Math.round(v * 255)).join(",")})`
    : "#fff";
  ctx.fillRect(0, 0, CANVAS_W, CANVAS_H);
  state.elements.forEach((el) => {
    ctx.fillStyle = cssFor(el.cls);
    ctx.fillRect(el.box.x0, el.box.y0, el.box.x1 - el.box.x0, el.box.y1 - el.box.y0);
    if (el.selected) {
      ctx.strokeStyle = "#111";
      ctx.setLineDash([4, 3]);
      ctx.strokeRect(el.box.x0, el.box.y0, el.box.x1 - el.box.x0, el.box.y1 - el.box.y0);
      ctx.setLineDash([]);
    }
  });
  queryButton.disabled = state.elements.length === 0;
}

function hit(x: number, y: number): number | null {
  for (let i = state.elements.length - 1; i >= 0; i--) {
    const b = state.elements[i]!.box;
    if (x >= b.x0 && x <= b.x1 && y >= b.y0 && y <= b.y1) return i;
  }
  return null;
}

function canvasPoint(ev: PointerEvent): { x: number; y: number } {
  const rect = canvas.getBoundingClientRect();
  return {
    x: ((ev.clientX - rect.left) / rect.width) * CANVAS_W,
    y: ((ev.clientY - rect.top) / rect.height) * CANVAS_H,
  };
}

canvas.addEventListener("pointerdown", (ev) => {
  const { x, y } = canvasPoint(ev);
  const target = hit(x, y);
  if (target !== null) {
    setState(selectElement(state, target));
    const b = state.elements[target]!.box;
    const nearCorner = Math.abs(x - b.x1) < 12 && Math.abs(y - b.y1) < 12;
    drag = { x0: nearCorner ? b.x0 : x, y0: nearCorner ? b.y0 : y, resizing: nearCorner ? target : null };
  } else {
    drag = { x0: x, y0: y, resizing: null };
    setState(selectElement(state, null));
  }
  canvas.setPointerCapture(ev.pointerId);
});

canvas.addEventListener("pointerup", (ev) => {
  if (!drag) return;
  const { x, y } = canvasPoint(ev);
  const moved = Math.abs(x - drag.x0) > 3 || Math.abs(y - drag.y0) > 3;
  if (drag.resizing !== null) {
    setState(resizeElement(state, drag.resizing, { x0: drag.x0, y0: drag.y0, x1: x, y1: y }));
  } else if (moved && selectedIndex(state) === null) {
    setState(placeElement(state, currentClass, { x0: drag.x0, y0: drag.y0, x1: x, y1: y }));
  }
  drag = null;
});

document.addEventListener("keydown", (ev) => {
  if (ev.key === "Delete" || ev.key === "Backspace") {
    const index = selectedIndex(state);
    if (index !== null) setState(deleteElement(state, index));
  }
});

undoButton.addEventListener("click", () => setState(undo(state)));
deleteButton.addEventListener("click", () => {
  const index = selectedIndex(state);
  if (index !== null) setState(deleteElement(state, index));
});
kSlider.addEventListener("input", () => {
  kLabel.textContent = kSlider.value;
});

function buildClassBar(): void {
  for (const name of COMPONENT_CLASSES) {
    const button = document.createElement("button");
    button.className = "class-chip";
    button.title = name;
    button.textContent = name.replace(/_/g, " ");
    button.style.borderColor = cssFor(name);
    button.addEventListener("click", () => {
      currentClass = name;
      const index = selectedIndex(state);
      if (index !== null) setState(classifyElement(state, index, name));
      document
        .querySelectorAll(".class-chip.active")
        .forEach((n) => n.classList.remove("active"));
      button.classList.add("active");
    });
    if (name === currentClass) button.classList.add("active");
    classBar.appendChild(button);
  }
}

function drawCard(commands: RectCommand[], w: number, h: number): HTMLCanvasElement {
  const card = document.createElement("canvas");
  card.width = w;
  card.height = h;
  const cardCtx = card.getContext("2d")!;
  for (const c of commands) {
    cardCtx.fillStyle = c.color;
    cardCtx.fillRect(c.x, c.y, c.w, c.h);
  }
  return card;
}

function showResults(items: QueryResult[]): void {
  results.replaceChildren();
  items.forEach((item, rank) => {
    const card = document.createElement("div");
    card.className = "card";
    if (item.layout && palette) {
      const commands = renderCommands(item.layout, palette, 108, 192);
      card.appendChild(drawCard(commands, 108, 192));
    }
    const caption = document.createElement("div");
    caption.className = "caption";
    caption.textContent =
      `#${rank + 1} ${item.id}` +
      (item.category ? ` (${item.category})` : "") +
      ` d=${item.distance.toFixed(3)}`;
    card.appendChild(caption);
    card.addEventListener("click", () => {
      if (item.layout) setState(loadLayout(state, item.layout));
    });
    results.appendChild(card);
  });
}

queryButton.addEventListener("click", async () => {
  clearError();
  queryButton.classList.add("busy");
  try {
    const response = await client.query(toQueryBody(state), Number(kSlider.value));
    showResults(response.results);
  } catch (e) {
    if (e instanceof DOMException && e.name === "AbortError") return;
    if (e instanceof ApiError) {
      showError(e.message, false);
    } else {
      showError("network failure - check the service and retry", true);
    }
  } finally {
    queryButton.classList.remove("busy");
  }
});

async function boot(): Promise<void> {
  try {
    palette = await client.palette();
    clearError();
  } catch {
    showError(`cannot reach uisearch service at ${SERVICE_URL}`, true);
  }
  buildClassBar();
  paint();
}

void boot();
