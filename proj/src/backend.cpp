#include "tgqa/backend.hpp"

#include <cstdlib>

#include "tgqa/error.hpp"
#include "tgqa/http_backend.hpp"
#include "tgqa/mock_backend.hpp"

namespace tgqa {

std::unique_ptr<Backend> makeBackend(const BackendSpec& spec) {
  if (spec.kind == BackendSpec::Kind::kMock) return std::make_unique<MockBackend>(spec.mock_seed);
  std::string url;
  if (spec.endpoint_url) {
    url = *spec.endpoint_url;
  } else if (const char* env = std::getenv("TG_BACKEND_URL")) {
    url = env;
  }
  if (url.empty()) {
    throw Error(ErrorCode::kConfigInvalid,
                "http backend needs an endpoint url (config or TG_BACKEND_URL)");
  }
  return std::make_unique<HttpBackend>(std::move(url), spec);
}

}  // namespace tgqa
