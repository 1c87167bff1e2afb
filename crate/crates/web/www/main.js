// Built with: wasm-pack build crates/web --target web --out-dir www/pkg
import init, { arak_svg, gibbs_svg, tension } from "./pkg/polyfield_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);
const seed = (id) => BigInt(Math.max(0, Math.floor(num(id))));

function guarded(f) {
  return () => {
    $("err").textContent = "";
    try {
      f();
    } catch (e) {
      $("err").textContent = String(e.message ?? e);
    }
  };
}

await init();

$("arak-go").onclick = guarded(() => {
  $("view").innerHTML = arak_svg(num("arak-r"), seed("arak-seed"));
});

$("gibbs-go").onclick = guarded(() => {
  $("view").innerHTML = gibbs_svg(num("gibbs-beta"), num("gibbs-r"), seed("gibbs-seed"));
});

$("t-go").onclick = guarded(() => {
  const tau = tension(num("t-beta"), num("t-lambda"), num("t-walks") | 0, 1n);
  $("t-out").textContent = `tau = ${tau.toFixed(4)}`;
});
