#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>

namespace gode {

// Flat key-value hyperparameter assignment. Values are numeric or the
// literal strings a grid can carry ("auto", motif lists).
class ParamMap {
public:
    using Value = std::variant<double, std::string>;

    void set(const std::string& key, double v) { values_[key] = v; }
    void set(const std::string& key, const std::string& v) { values_[key] = v; }

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    double get_double(const std::string& key, double fallback) const;
    std::size_t get_count(const std::string& key, std::size_t fallback) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;

    // "k1=v1,k2=v2"; numbers parsed as doubles, everything else kept verbatim.
    static ParamMap parse(const std::string& spec);
    std::string to_json() const;

    const std::map<std::string, Value>& raw() const { return values_; }

private:
    std::map<std::string, Value> values_;
};

}  // namespace gode
