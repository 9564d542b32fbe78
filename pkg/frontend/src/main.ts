import { BriefingApi } from "./api.js";
import { BriefingApp } from "./app.js";

const params = new URLSearchParams(window.location.search);
const base = params.get("api") ?? "";
const root = document.getElementById("app");
if (!root) {
  throw new Error("missing #app mount point");
}
const app = new BriefingApp(root, new BriefingApi(base));
void app.start().catch((err) => {
  root.textContent = `failed to load: ${err}`;
});
