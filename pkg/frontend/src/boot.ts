import "./style.css";
import { boot } from "./main";

const root = document.getElementById("app");
if (root) boot(root);
