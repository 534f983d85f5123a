import { mountApp } from "./dom.js";

const DEFAULT_SERVICE_URL = "http://127.0.0.1:8377";

const root = document.getElementById("app");
if (!root) throw new Error("missing #app container");
const serviceUrl =
  new URLSearchParams(window.location.search).get("service") ?? DEFAULT_SERVICE_URL;
mountApp(root, serviceUrl);
