/** Entry point: parse configuration, then serve until interrupted. */

import { ConfigError, loadConfig } from "./config.js";
import { createApp } from "./server.js";

try {
  const config = loadConfig(process.argv.slice(2), process.env);
  const app = createApp(config);
  app.listen(config.port, config.host, () => {
    console.log(
      `model server listening on http://${config.host}:${config.port} ` +
        `(embed=${config.embedModel} score=${config.scoreModel} ` +
        `nsp=${config.nspModel} ppl=${config.pplModel} device=${config.device})`,
    );
  });
} catch (err) {
  if (err instanceof ConfigError) {
    console.error(`error: ${err.message}`);
    process.exit(1);
  }
  throw err;
}
