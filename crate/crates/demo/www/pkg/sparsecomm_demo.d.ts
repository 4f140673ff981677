/* tslint:disable */
/* eslint-disable */

/**
 * Exact top-k error ratio and both bounds over log-spaced k.
 */
export class BoundCurve {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly exact: Float64Array;
    readonly ks: Float64Array;
    readonly line_violations: number;
    readonly loose: Float64Array;
    readonly tight: Float64Array;
}

/**
 * One row per operator: selected count, full passes, recall against exact
 * top-k and the kept share of top-k's energy.
 */
export class Comparison {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly energy: Float64Array;
    readonly names: string[];
    readonly passes: Float64Array;
    readonly recall: Float64Array;
    readonly selected: Float64Array;
}

export class Histogram {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly cdf: Float64Array;
    readonly counts: Float64Array;
    readonly edges: Float64Array;
    /**
     * Excess kurtosis of the sample.
     */
    readonly kurtosis: number;
}

export function bound_curve(d: number, dist: string, seed: bigint, points: number): BoundCurve;

export function compare_selectors(d: number, k: number, dist: string, seed: bigint): Comparison;

export function histogram_of(d: number, dist: string, seed: bigint, bins: number): Histogram;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_boundcurve_free: (a: number, b: number) => void;
    readonly __wbg_comparison_free: (a: number, b: number) => void;
    readonly __wbg_histogram_free: (a: number, b: number) => void;
    readonly bound_curve: (a: number, b: number, c: number, d: bigint, e: number) => [number, number, number];
    readonly boundcurve_exact: (a: number) => [number, number];
    readonly boundcurve_ks: (a: number) => [number, number];
    readonly boundcurve_line_violations: (a: number) => number;
    readonly boundcurve_loose: (a: number) => [number, number];
    readonly boundcurve_tight: (a: number) => [number, number];
    readonly compare_selectors: (a: number, b: number, c: number, d: number, e: bigint) => [number, number, number];
    readonly comparison_energy: (a: number) => [number, number];
    readonly comparison_names: (a: number) => [number, number];
    readonly comparison_passes: (a: number) => [number, number];
    readonly comparison_recall: (a: number) => [number, number];
    readonly comparison_selected: (a: number) => [number, number];
    readonly histogram_cdf: (a: number) => [number, number];
    readonly histogram_counts: (a: number) => [number, number];
    readonly histogram_edges: (a: number) => [number, number];
    readonly histogram_kurtosis: (a: number) => number;
    readonly histogram_of: (a: number, b: number, c: number, d: bigint, e: number) => [number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __externref_drop_slice: (a: number, b: number) => void;
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
