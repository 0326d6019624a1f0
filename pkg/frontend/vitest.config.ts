import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["tests/**/*.test.ts"],
    // The session test boots the real control service; give it room.
    testTimeout: 120_000,
    hookTimeout: 120_000,
  },
});
