import { defineConfig } from "vitest/config";

export default defineConfig({
  base: "/ui/",
  build: { outDir: "dist", emptyOutDir: true },
  server: {
    proxy: { "/api": "http://127.0.0.1:8080" },
  },
  test: {
    environment: "jsdom",
    include: ["tests/**/*.test.ts"],
    testTimeout: 180000,
    hookTimeout: 180000,
    fileParallelism: false,
  },
});
