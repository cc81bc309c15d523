import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "node",
    globalSetup: "./tests/setup/service.ts",
    testTimeout: 20000,
    hookTimeout: 90000,
  },
});
