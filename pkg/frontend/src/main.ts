/** Entry point. The service base URL defaults to the page origin and
 * can be overridden with ?service=http://host:port for local setups
 * where the dashboard is served from a file or another port.
 */

import { OversightApi } from "./api.js";
import { App } from "./app.js";

function serviceBase(): string {
  const param = new URLSearchParams(window.location.search).get("service");
  return param ?? window.location.origin;
}

const mount = document.getElementById("app");
if (mount === null) {
  throw new Error("missing #app mount point");
}

const app = new App(mount, new OversightApi(serviceBase()));
app.start();
