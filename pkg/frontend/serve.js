// zero-dependency static file server for local use of the built viewer
import { createServer } from "node:http";
import { readFile } from "node:fs/promises";
import { extname, join, normalize } from "node:path";

const root = new URL("./dist", import.meta.url).pathname;
const port = Number(process.env.PORT ?? 8090);
const types = {
  ".html": "text/html", ".js": "text/javascript", ".css": "text/css",
  ".json": "application/json", ".png": "image/png", ".svg": "image/svg+xml",
};

createServer(async (req, res) => {
  let path = normalize(decodeURIComponent((req.url ?? "/").split("?")[0]));
  if (path === "/" || path === "\\") path = "/index.html";
  try {
    const body = await readFile(join(root, path));
    res.writeHead(200, { "Content-Type": types[extname(path)] ?? "application/octet-stream" });
    res.end(body);
  } catch {
    res.writeHead(404, { "Content-Type": "text/plain" });
    res.end("not found");
  }
}).listen(port, () => console.log(`viewer on http://localhost:${port}`));
