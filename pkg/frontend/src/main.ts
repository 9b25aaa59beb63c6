import { startRouter } from "./router";
import "./style.css";

const root = document.getElementById("app");
if (root) startRouter(root);
