/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_explorer_free: (a: number, b: number) => void;
export const explorer_bestValue: (a: number) => number;
export const explorer_cells: (a: number) => [number, number];
export const explorer_minScore: (a: number) => number;
export const explorer_new: (a: number, b: number, c: number, d: number) => [number, number, number];
export const explorer_queries: (a: number) => [number, number];
export const explorer_simpleRegret: (a: number) => number;
export const explorer_step: (a: number, b: number) => [number, number, number];
export const heatmap: (a: number, b: number, c: number) => [number, number, number, number];
export const regretCurve: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const wrappedExtent: () => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_start: () => void;
