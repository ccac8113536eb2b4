#pragma once

// Real network transport for ExplorerClient. Kept apart from explorer.hpp so
// that only binaries which talk to the network pull in cpp-httplib.

#include <memory>
#include <string>

#include <httplib.h>

#include "txgraph/explorer.hpp"

namespace txgraph {

/// Transport over cpp-httplib. Accepts absolute http:// or https:// URLs
/// (https needs CPPHTTPLIB_OPENSSL_SUPPORT).
inline Transport make_http_transport(double timeout_seconds) {
    return [timeout_seconds](const std::string& method, const std::string& url) -> HttpResponse {
        const auto scheme_end = url.find("://");
        if (scheme_end == std::string::npos) throw TransportError("not an absolute URL: " + url);
        const auto path_start = url.find('/', scheme_end + 3);
        const auto origin = url.substr(0, path_start);
        const auto path = path_start == std::string::npos ? std::string("/") : url.substr(path_start);

        httplib::Client client(origin);
        const auto secs = static_cast<time_t>(timeout_seconds);
        const auto usecs = static_cast<time_t>((timeout_seconds - static_cast<double>(secs)) * 1e6);
        client.set_connection_timeout(secs, usecs);
        client.set_read_timeout(secs, usecs);
        client.set_follow_location(true);
        if (method != "GET") throw TransportError("unsupported method " + method);
        auto res = client.Get(path);
        if (!res) throw TransportError("request to " + url + " failed: " + httplib::to_string(res.error()));
        return HttpResponse{res->status, res->body};
    };
}

}  // namespace txgraph
