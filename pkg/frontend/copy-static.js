// copy public assets next to the compiled modules
import { cpSync, mkdirSync } from "node:fs";

mkdirSync("dist", { recursive: true });
cpSync("public", "dist", { recursive: true });
console.log("static assets copied to dist/");
