/**
 * Pure editor-state core: every mutation returns a new state and pushes the
 * previous element list onto a bounded undo stack. No DOM dependencies, so
 * the whole editing model is unit-testable in node.
 */
import type { ComponentClassName, LayoutJson, QueryRequest } from "./schema.js";

export const CANVAS_W = 360;
export const CANVAS_H = 640;
export const MIN_SIZE = 4;
export const UNDO_DEPTH = 100;

export interface Box {
  x0: number;
  y0: number;
  x1: number;
  y1: number;
}

export interface EditorElement {
  cls: ComponentClassName;
  box: Box;
  selected: boolean;
}

export interface EditorState {
  elements: EditorElement[];
  undoStack: EditorElement[][];
}

export function emptyState(): EditorState {
  return { elements: [], undoStack: [] };
}

function clampBox(box: Box): Box {
  let x0 = Math.max(0, Math.min(box.x0, box.x1));
  let y0 = Math.max(0, Math.min(box.y0, box.y1));
  let x1 = Math.min(CANVAS_W, Math.max(box.x0, box.x1));
  let y1 = Math.min(CANVAS_H, Math.max(box.y0, box.y1));
  x0 = Math.min(x0, CANVAS_W);
  y0 = Math.min(y0, CANVAS_H);
  // enforce the minimum size, keeping the box inside the canvas
  if (x1 - x0 < MIN_SIZE) {
    x1 = x0 + MIN_SIZE;
    if (x1 > CANVAS_W) {
      x1 = CANVAS_W;
      x0 = CANVAS_W - MIN_SIZE;
    }
  }
  if (y1 - y0 < MIN_SIZE) {
    y1 = y0 + MIN_SIZE;
    if (y1 > CANVAS_H) {
      y1 = CANVAS_H;
      y0 = CANVAS_H - MIN_SIZE;
    }
  }
  return { x0, y0, x1, y1 };
}

function snapshot(elements: EditorElement[]): EditorElement[] {
  return elements.map((el) => ({ ...el, box: { ...el.box } }));
}

function pushUndo(state: EditorState): EditorElement[][] {
  const stack = [...state.undoStack, snapshot(state.elements)];
  return stack.length > UNDO_DEPTH ? stack.slice(stack.length - UNDO_DEPTH) : stack;
}

function withElements(state: EditorState, elements: EditorElement[]): EditorState {
  return { elements, undoStack: pushUndo(state) };
}

export function placeElement(
  state: EditorState,
  cls: ComponentClassName,
  box: Box,
): EditorState {
  const clamped = clampBox(box);
  const deselected = state.elements.map((el) => ({ ...el, selected: false }));
  return withElements(state, [...deselected, { cls, box: clamped, selected: true }]);
}

export function resizeElement(state: EditorState, index: number, box: Box): EditorState {
  const elements = snapshot(state.elements);
  const el = elements[index];
  if (!el) return state;
  el.box = clampBox(box);
  return withElements(state, elements);
}

export function moveElement(
  state: EditorState,
  index: number,
  dx: number,
  dy: number,
): EditorState {
  const el = state.elements[index];
  if (!el) return state;
  const w = el.box.x1 - el.box.x0;
  const h = el.box.y1 - el.box.y0;
  const x0 = Math.max(0, Math.min(el.box.x0 + dx, CANVAS_W - w));
  const y0 = Math.max(0, Math.min(el.box.y0 + dy, CANVAS_H - h));
  return resizeElement(state, index, { x0, y0, x1: x0 + w, y1: y0 + h });
}

export function deleteElement(state: EditorState, index: number): EditorState {
  if (index < 0 || index >= state.elements.length) return state;
  const elements = snapshot(state.elements);
  elements.splice(index, 1);
  return withElements(state, elements);
}

export function classifyElement(
  state: EditorState,
  index: number,
  cls: ComponentClassName,
): EditorState {
  const elements = snapshot(state.elements);
  const el = elements[index];
  if (!el) return state;
  el.cls = cls;
  return withElements(state, elements);
}

/** Select one element (or none); selection does not touch the undo stack. */
export function selectElement(state: EditorState, index: number | null): EditorState {
  return {
    elements: state.elements.map((el, i) => ({ ...el, selected: i === index })),
    undoStack: state.undoStack,
  };
}

export function selectedIndex(state: EditorState): number | null {
  const i = state.elements.findIndex((el) => el.selected);
  return i >= 0 ? i : null;
}

export function undo(state: EditorState): EditorState {
  if (state.undoStack.length === 0) return state;
  const previous = state.undoStack[state.undoStack.length - 1]!;
  return { elements: previous, undoStack: state.undoStack.slice(0, -1) };
}

/** Serialize the canvas contents to the service's query-body schema. */
export function toQueryBody(state: EditorState): QueryRequest {
  return {
    width: CANVAS_W,
    height: CANVAS_H,
    detections: state.elements.map((el) => ({
      class: el.cls,
      box: [el.box.x0, el.box.y0, el.box.x1, el.box.y1],
    })),
  };
}

/** Replace canvas contents with a retrieved layout, rescaled to the editor. */
export function loadLayout(state: EditorState, layout: LayoutJson): EditorState {
  const sx = CANVAS_W / layout.width;
  const sy = CANVAS_H / layout.height;
  const elements: EditorElement[] = layout.detections.map((det) => ({
    cls: det.class,
    box: clampBox({
      x0: det.box[0] * sx,
      y0: det.box[1] * sy,
      x1: det.box[2] * sx,
      y1: det.box[3] * sy,
    }),
    selected: false,
  }));
  return withElements(state, elements);
}
