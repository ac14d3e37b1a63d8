#include "gode/params.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "gode/error.hpp"

namespace gode {

double ParamMap::get_double(const std::string& key, double fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    if (const double* d = std::get_if<double>(&it->second)) return *d;
    throw ValidationError("parameter '" + key + "' is not numeric");
}

std::size_t ParamMap::get_count(const std::string& key, std::size_t fallback) const {
    const double d = get_double(key, double(fallback));
    if (d < 0.0 || d != std::floor(d)) {
        throw ValidationError("parameter '" + key + "' must be a non-negative integer");
    }
    return std::size_t(d);
}

std::string ParamMap::get_string(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    if (const std::string* s = std::get_if<std::string>(&it->second)) return *s;
    std::ostringstream os;
    os << std::get<double>(it->second);
    return os.str();
}

ParamMap ParamMap::parse(const std::string& spec) {
    ParamMap out;
    std::size_t pos = 0;
    while (pos < spec.size()) {
        std::size_t end = spec.find(',', pos);
        if (end == std::string::npos) end = spec.size();
        const std::string item = spec.substr(pos, end - pos);
        pos = end + 1;
        if (item.empty()) continue;
        const std::size_t eq = item.find('=');
        if (eq == std::string::npos) {
            throw ValidationError("parameter item '" + item + "' is not KEY=VALUE");
        }
        const std::string key = item.substr(0, eq);
        const std::string val = item.substr(eq + 1);
        double d = 0.0;
        auto [p, ec] = std::from_chars(val.data(), val.data() + val.size(), d);
        if (ec == std::errc() && p == val.data() + val.size()) {
            out.set(key, d);
        } else {
            out.set(key, val);
        }
    }
    return out;
}

std::string ParamMap::to_json() const {
    std::ostringstream os;
    os << "{";
    bool first = true;
    for (const auto& [k, v] : values_) {
        if (!first) os << ",";
        first = false;
        os << "\"" << k << "\":";
        if (const double* d = std::get_if<double>(&v)) {
            if (*d == std::floor(*d) && std::abs(*d) < 1e15) {
                os << std::int64_t(*d);
            } else {
                os.precision(17);
                os << *d;
            }
        } else {
            os << "\"" << std::get<std::string>(v) << "\"";
        }
    }
    os << "}";
    return os.str();
}

}  // namespace gode
