import { ApiClient } from "./api.js";
import { mountApp } from "./ui.js";

const root = document.getElementById("app");
if (root) {
  mountApp(root, new ApiClient(""), { playerId: "web" });
}
