/**
 * Zod schemas for every payload exchanged with the uisearch service.
 * The query body must match the service's detections-JSON schema exactly;
 * the contract tests validate serialized editor states against these.
 */
import { z } from "zod";

export const COMPONENT_CLASSES = [
  "background_image",
  "checked_view",
  "icon",
  "input_field",
  "image",
  "text",
  "text_button",
  "page_indicator",
  "pop_up_window",
  "sliding_menu",
  "switch",
  "upper_task_bar",
] as const;

export type ComponentClassName = (typeof COMPONENT_CLASSES)[number];

export const BoxSchema = z.tuple([z.number(), z.number(), z.number(), z.number()]);

export const DetectionSchema = z.object({
  class: z.enum(COMPONENT_CLASSES),
  box: BoxSchema,
  confidence: z.number().min(0).max(1).optional(),
});

export const QueryRequestSchema = z.object({
  id: z.string().optional(),
  width: z.number().int().positive(),
  height: z.number().int().positive(),
  detections: z.array(DetectionSchema),
});

export const LayoutSchema = QueryRequestSchema.extend({
  id: z.string(),
  category: z.string().nullable().optional(),
});

export const QueryResultSchema = z.object({
  id: z.string(),
  distance: z.number().nonnegative(),
  layout: LayoutSchema.nullable(),
  category: z.string().nullable(),
});

export const QueryResponseSchema = z.object({
  results: z.array(QueryResultSchema),
});

export const PaletteEntrySchema = z.object({
  name: z.enum(COMPONENT_CLASSES),
  code: z.number().int().min(0).max(11),
  color: z.tuple([z.number(), z.number(), z.number()]),
});

export const PaletteSchema = z.object({
  background: z.tuple([z.number(), z.number(), z.number()]),
  classes: z.array(PaletteEntrySchema).length(12),
});

export const HealthSchema = z.object({
  status: z.string(),
  index_size: z.number().int().nonnegative(),
  dim: z.number().int().positive(),
  m: z.number().int().min(0).max(4),
});

export type QueryRequest = z.infer<typeof QueryRequestSchema>;
export type LayoutJson = z.infer<typeof LayoutSchema>;
export type QueryResult = z.infer<typeof QueryResultSchema>;
export type QueryResponse = z.infer<typeof QueryResponseSchema>;
export type Palette = z.infer<typeof PaletteSchema>;
