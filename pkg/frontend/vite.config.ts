import { defineConfig } from "vitest/config";

export default defineConfig({
  build: { outDir: "dist", target: "es2022" },
  server: {
    // `npm run dev` against a locally running server; the built UI is
    // served same-origin instead and needs no proxy
    proxy: { "/api": "http://127.0.0.1:8000" },
  },
  test: {
    environment: "jsdom",
    include: ["tests/**/*.test.ts"],
    testTimeout: 20_000,
    // the live-server test drives a spawned backend; keep files serial
    fileParallelism: false,
  },
});
