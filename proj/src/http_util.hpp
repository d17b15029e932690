#pragma once

#include <string>
#include <utility>

#include "litmine/errors.hpp"

namespace litmine::detail {

/// Splits "http://host:port/path" into ("http://host:port", "/path").
inline std::pair<std::string, std::string> split_url(const std::string& url, std::string_view module)
{
    auto scheme = url.find("://");
    if (scheme == std::string::npos) {
        throw ConfigError(module, "URL must include a scheme: " + url);
    }
    auto slash = url.find('/', scheme + 3);
    if (slash == std::string::npos) {
        return {url, "/"};
    }
    return {url.substr(0, slash), url.substr(slash)};
}

/// Body that failed to parse or validate. Retried like a transport failure,
/// then reported as a protocol error.
class MalformedBody : public TransportError {
public:
    using TransportError::TransportError;
};

} // namespace litmine::detail
