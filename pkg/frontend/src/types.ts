// Wire types for the canonical slide JSON and the service endpoints.
// Documents are opaque to the UI: it renders server SVG and never edits
// payload fields itself.

export interface ColorPayload {
  rgb: string;
  alpha?: number;
}

export interface GeometryPayload {
  x: number;
  y: number;
  width: number;
  height: number;
  rotation?: number;
}

export interface KindPayload {
  type: "auto_shape" | "placeholder";
  name?: string;
  media?: "image" | "video";
}

export interface FillPayload {
  mode: "solid" | "gradient" | "pattern" | "none";
  colors: ColorPayload[];
  transparency?: number;
}

export interface RunPayload {
  text: string;
  font_name: string;
  font_size: number;
  color: ColorPayload;
}

export interface TextPayload {
  runs: RunPayload[];
  line_spacing?: number;
  alignment?: "left" | "center" | "right" | "justify";
}

export interface ElementPayload {
  id: string;
  kind: KindPayload;
  position: GeometryPayload;
  fill: FillPayload;
  text?: TextPayload;
  status?: "TENTATIVE" | "FINAL";
}

export interface SlideDocPayload {
  canvas_width: number;
  canvas_height: number;
  source_id: string;
  elements: ElementPayload[];
}

export interface SlideView {
  session_id: string;
  doc: SlideDocPayload;
  svg: string;
  flagged: string[];
}

export interface BranchView {
  branch_id: string;
  doc: SlideDocPayload;
  svg: string;
}

export interface BranchResponse {
  session_id: string;
  branches: BranchView[];
  errors: Array<Record<string, unknown>>;
}

export interface ReviewResponse {
  session_id: string;
  flagged: string[];
}

export interface TraceResponse {
  session_id: string;
  parent: SlideDocPayload;
  current: SlideDocPayload;
  history: Array<{ event: string } & Record<string, unknown>>;
}
