#pragma once

#include <memory>

#include "chronoqa/gateway.h"
#include "chronoqa/mock_oracle.h"

namespace chronoqa::testing {

inline std::unique_ptr<Gateway> scripted_gateway(OracleFn fn, int concurrency = 4) {
  EndpointConfig c;
  c.base_url = "mock:test";
  c.model_name = "mock";
  c.max_concurrency = concurrency;
  c.max_retries = 0;
  return std::make_unique<Gateway>(c, std::make_shared<OracleTransport>(std::move(fn)));
}

inline std::unique_ptr<Gateway> oracle_gateway(OracleSpec spec, int concurrency = 4) {
  return scripted_gateway(make_oracle(std::move(spec)), concurrency);
}

}  // namespace chronoqa::testing
