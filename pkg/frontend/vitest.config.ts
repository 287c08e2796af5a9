import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    globalSetup: ["tests/server-setup.ts"],
    include: ["tests/**/*.test.ts"],
    fileParallelism: false,
    testTimeout: 20000,
  },
});
