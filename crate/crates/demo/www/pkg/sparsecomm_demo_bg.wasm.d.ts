/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_boundcurve_free: (a: number, b: number) => void;
export const __wbg_comparison_free: (a: number, b: number) => void;
export const __wbg_histogram_free: (a: number, b: number) => void;
export const bound_curve: (a: number, b: number, c: number, d: bigint, e: number) => [number, number, number];
export const boundcurve_exact: (a: number) => [number, number];
export const boundcurve_ks: (a: number) => [number, number];
export const boundcurve_line_violations: (a: number) => number;
export const boundcurve_loose: (a: number) => [number, number];
export const boundcurve_tight: (a: number) => [number, number];
export const compare_selectors: (a: number, b: number, c: number, d: number, e: bigint) => [number, number, number];
export const comparison_energy: (a: number) => [number, number];
export const comparison_names: (a: number) => [number, number];
export const comparison_passes: (a: number) => [number, number];
export const comparison_recall: (a: number) => [number, number];
export const comparison_selected: (a: number) => [number, number];
export const histogram_cdf: (a: number) => [number, number];
export const histogram_counts: (a: number) => [number, number];
export const histogram_edges: (a: number) => [number, number];
export const histogram_kurtosis: (a: number) => number;
export const histogram_of: (a: number, b: number, c: number, d: bigint, e: number) => [number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __externref_drop_slice: (a: number, b: number) => void;
export const __wbindgen_start: () => void;
