// Copyright 2026 The txlens Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace txlens {

struct Url {
    std::string scheme;  // "http" or "https"
    std::string host;
    int port{0};
    std::string target;  // path plus query, at least "/"

    //! nullopt unless the text is an absolute http(s) URL with a host
    static std::optional<Url> parse(const std::string& text);
    [[nodiscard]] std::string origin() const;
};

using HttpHeaders = std::vector<std::pair<std::string, std::string>>;

struct HttpResponse {
    int status{0};
    std::string body;
};

//! Throws TimeoutError on connect/read timeouts and TransportError on any other transport failure.
//! Non-2xx statuses are returned, not thrown.
HttpResponse http_post(const Url& url, const std::string& body, const HttpHeaders& headers,
                       std::chrono::milliseconds timeout);
HttpResponse http_get(const Url& url, const HttpHeaders& headers, std::chrono::milliseconds timeout);

//! RFC 3986 percent-encoding for query values
std::string url_encode(const std::string& text);

}  // namespace txlens
