export * from "./types";
export * from "./format";
export * from "./warnings";
export * from "./api";
export * from "./fixtures";
export * from "./state";
export * from "./store";
export * from "./render/histogram";
export * from "./render/radar";
export * from "./render/context";
export * from "./render/importances";
export * from "./render/app";
