/* tslint:disable */
/* eslint-disable */

export class Explorer {
    free(): void;
    [Symbol.dispose](): void;
    bestValue(): number;
    cells(): Float64Array;
    minScore(): number;
    constructor(spec: string, lipschitz?: number | null);
    queries(): Float64Array;
    simpleRegret(): number;
    step(k: number): number;
}

export function heatmap(spec: string, res: number): Float64Array;

export function regretCurve(spec: string, dim: number, horizon: number): Float64Array;

/**
 * Extent of the wrapped domain in 2-D, `[width, height]`.
 */
export function wrappedExtent(): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_explorer_free: (a: number, b: number) => void;
    readonly explorer_bestValue: (a: number) => number;
    readonly explorer_cells: (a: number) => [number, number];
    readonly explorer_minScore: (a: number) => number;
    readonly explorer_new: (a: number, b: number, c: number, d: number) => [number, number, number];
    readonly explorer_queries: (a: number) => [number, number];
    readonly explorer_simpleRegret: (a: number) => number;
    readonly explorer_step: (a: number, b: number) => [number, number, number];
    readonly heatmap: (a: number, b: number, c: number) => [number, number, number, number];
    readonly regretCurve: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly wrappedExtent: () => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
