// Copyright 2026 The txlens Authors
// SPDX-License-Identifier: Apache-2.0

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <txlens/errors.hpp>
#include <txlens/http.hpp>

namespace txlens {

std::optional<Url> Url::parse(const std::string& text) {
    Url url;
    const auto sep = text.find("://");
    if (sep == std::string::npos) return std::nullopt;
    url.scheme = text.substr(0, sep);
    for (auto& c : url.scheme) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (url.scheme != "http" && url.scheme != "https") return std::nullopt;

    std::string rest = text.substr(sep + 3);
    const auto slash = rest.find_first_of("/?");
    std::string authority = rest.substr(0, slash);
    url.target = slash == std::string::npos ? "/" : rest.substr(slash);
    if (url.target.starts_with("?")) url.target.insert(url.target.begin(), '/');
    if (const auto at = authority.rfind('@'); at != std::string::npos) authority = authority.substr(at + 1);

    url.port = url.scheme == "https" ? 443 : 80;
    if (const auto colon = authority.rfind(':'); colon != std::string::npos && authority.find(']') == std::string::npos) {
        const auto port_text = authority.substr(colon + 1);
        if (port_text.empty() || port_text.size() > 5) return std::nullopt;
        for (char c : port_text)
            if (c < '0' || c > '9') return std::nullopt;
        url.port = std::stoi(port_text);
        authority = authority.substr(0, colon);
    }
    if (authority.empty()) return std::nullopt;
    url.host = authority;
    return url;
}

std::string Url::origin() const { return scheme + "://" + host + ":" + std::to_string(port); }

namespace {

    template <typename Fn>
    HttpResponse perform(const Url& url, const HttpHeaders& headers, std::chrono::milliseconds timeout, Fn&& fn) {
        httplib::Client client(url.origin());
        client.set_connection_timeout(timeout);
        client.set_read_timeout(timeout);
        client.set_write_timeout(timeout);
        client.enable_server_certificate_verification(true);

        httplib::Headers h;
        for (const auto& [k, v] : headers) h.emplace(k, v);

        httplib::Result result = fn(client, h);
        if (!result) {
            const auto err = result.error();
            const std::string what = url.origin() + ": " + httplib::to_string(err);
            if (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read) throw TimeoutError(what);
            throw TransportError(what);
        }
        return HttpResponse{result->status, result->body};
    }

}  // namespace

HttpResponse http_post(const Url& url, const std::string& body, const HttpHeaders& headers,
                       std::chrono::milliseconds timeout) {
    return perform(url, headers, timeout, [&](httplib::Client& c, const httplib::Headers& h) {
        return c.Post(url.target, h, body, "application/json");
    });
}

HttpResponse http_get(const Url& url, const HttpHeaders& headers, std::chrono::milliseconds timeout) {
    return perform(url, headers, timeout, [&](httplib::Client& c, const httplib::Headers& h) { return c.Get(url.target, h); });
}

std::string url_encode(const std::string& text) {
    static constexpr char kDigits[] = "0123456789ABCDEF";
    std::string out;
    for (unsigned char c : text) {
        if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
            out.push_back(static_cast<char>(c));
        } else {
            out.push_back('%');
            out.push_back(kDigits[c >> 4]);
            out.push_back(kDigits[c & 0x0f]);
        }
    }
    return out;
}

}  // namespace txlens
