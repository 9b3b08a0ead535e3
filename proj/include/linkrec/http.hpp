#pragma once

#include <chrono>
#include <map>
#include <string>

namespace linkrec {

struct HttpResponse {
  int status = 0;
  std::string body;
};

// Minimal JSON-over-HTTP POST. Returns status 0 with the transport error in
// `body` when no response was received.
HttpResponse http_post_json(const std::string& url, const std::string& body,
                            const std::map<std::string, std::string>& headers,
                            std::chrono::seconds timeout);

inline bool is_retryable_status(int status) {
  return status == 0 || status == 408 || status == 429 || status >= 500;
}

}  // namespace linkrec
