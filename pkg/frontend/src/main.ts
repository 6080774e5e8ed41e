import { ViewerApp } from "./viewer.js";

const DEFAULT_SERVER =
  new URLSearchParams(window.location.search).get("server") ?? "http://localhost:8091";

const app = new ViewerApp(DEFAULT_SERVER);
void app.start();

// expose for the browser console; handy when debugging a shared session
(window as unknown as { mdstream: ViewerApp }).mdstream = app;
