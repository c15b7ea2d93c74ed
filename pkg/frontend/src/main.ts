import { App } from "./app.js"

const mount = document.getElementById("app")
if (!mount) throw new Error("missing #app mount point")
new App(mount).render()
