#ifndef GBRS_DATASET_HPP
#define GBRS_DATASET_HPP

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "json.hpp"

namespace gbrs {

/// Thrown when a caller breaks a documented precondition.
class ContractViolation : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed input file (CSV body, schema sidecar).
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& what)
{
    if (!cond) throw ContractViolation(what);
}

enum class AttributeKind { numeric, categorical };

inline const char* to_string(AttributeKind k)
{
    return k == AttributeKind::numeric ? "numeric" : "categorical";
}

struct AttributeMeta {
    std::string name;
    AttributeKind kind = AttributeKind::numeric;
    /// Category strings indexed by their integer code (categorical only).
    std::vector<std::string> categories;
    double raw_min = 0.0;
    double raw_max = 0.0;
};

/// Ordered list of distinct attribute indexes. Order is selection order.
class AttributeSubset {
public:
    AttributeSubset() = default;

    AttributeSubset(std::vector<std::size_t> indexes, std::size_t attribute_count)
        : idx_(std::move(indexes))
    {
        for (std::size_t i = 0; i < idx_.size(); ++i) {
            require(idx_[i] < attribute_count,
                    "attribute index " + std::to_string(idx_[i]) + " out of range");
            for (std::size_t j = 0; j < i; ++j)
                require(idx_[j] != idx_[i],
                        "duplicate attribute index " + std::to_string(idx_[i]));
        }
    }

    static AttributeSubset all(std::size_t attribute_count)
    {
        std::vector<std::size_t> v(attribute_count);
        for (std::size_t i = 0; i < attribute_count; ++i) v[i] = i;
        AttributeSubset s;
        s.idx_ = std::move(v);
        return s;
    }

    [[nodiscard]] AttributeSubset with(std::size_t a) const
    {
        require(!contains(a), "attribute " + std::to_string(a) + " already in subset");
        AttributeSubset s = *this;
        s.idx_.push_back(a);
        return s;
    }

    [[nodiscard]] AttributeSubset prefix(std::size_t len) const
    {
        require(len <= idx_.size(), "prefix longer than subset");
        AttributeSubset s;
        s.idx_.assign(idx_.begin(), idx_.begin() + static_cast<std::ptrdiff_t>(len));
        return s;
    }

    bool contains(std::size_t a) const
    {
        return std::find(idx_.begin(), idx_.end(), a) != idx_.end();
    }

    std::size_t size() const { return idx_.size(); }
    bool empty() const { return idx_.empty(); }
    std::size_t operator[](std::size_t i) const { return idx_[i]; }
    auto begin() const { return idx_.begin(); }
    auto end() const { return idx_.end(); }
    const std::vector<std::size_t>& indexes() const { return idx_; }

    friend bool operator==(const AttributeSubset&, const AttributeSubset&) = default;

private:
    std::vector<std::size_t> idx_;
};

/// Raw per-column range used by min-max scaling.
struct ColumnRange {
    double min = 0.0;
    double max = 0.0;
};

/// The universe: encoded sample matrix, labels and attribute metadata.
/// Immutable once built; every builder returns a fresh instance.
class DecisionSystem {
public:
    DecisionSystem() = default;

    DecisionSystem(std::string name,
                   std::vector<AttributeMeta> attributes,
                   std::vector<double> raw,
                   std::vector<double> values,
                   std::vector<int> labels,
                   std::vector<std::string> label_names,
                   bool normalized)
        : name_(std::move(name)), attrs_(std::move(attributes)), raw_(std::move(raw)),
          values_(std::move(values)), labels_(std::move(labels)),
          label_names_(std::move(label_names)), normalized_(normalized)
    {
        const std::size_t n = labels_.size(), d = attrs_.size();
        require(raw_.size() == n * d, "raw matrix shape does not match n x d");
        require(values_.size() == n * d, "value matrix shape does not match n x d");
        for (int y : labels_)
            require(y >= 0 && static_cast<std::size_t>(y) < label_names_.size(),
                    "label id out of range");
    }

    const std::string& name() const { return name_; }
    std::size_t size() const { return labels_.size(); }
    std::size_t attribute_count() const { return attrs_.size(); }
    std::size_t class_count() const { return label_names_.size(); }
    bool normalized() const { return normalized_; }

    double value(std::size_t i, std::size_t a) const { return values_[i * attrs_.size() + a]; }
    double raw(std::size_t i, std::size_t a) const { return raw_[i * attrs_.size() + a]; }
    int label(std::size_t i) const { return labels_[i]; }

    std::span<const double> row(std::size_t i) const
    {
        return {values_.data() + i * attrs_.size(), attrs_.size()};
    }
    std::span<const double> raw_row(std::size_t i) const
    {
        return {raw_.data() + i * attrs_.size(), attrs_.size()};
    }

    const std::vector<int>& labels() const { return labels_; }
    const std::vector<AttributeMeta>& attributes() const { return attrs_; }
    const AttributeMeta& attribute(std::size_t a) const { return attrs_[a]; }
    const std::vector<std::string>& label_names() const { return label_names_; }
    const std::vector<double>& raw_matrix() const { return raw_; }
    const std::vector<double>& value_matrix() const { return values_; }

    /// True when every attribute is categorical or integer-valued.
    bool is_discrete() const
    {
        for (std::size_t a = 0; a < attrs_.size(); ++a) {
            if (attrs_[a].kind == AttributeKind::categorical) continue;
            for (std::size_t i = 0; i < size(); ++i) {
                double v = raw(i, a);
                if (v != std::floor(v)) return false;
            }
        }
        return true;
    }

private:
    std::string name_;
    std::vector<AttributeMeta> attrs_;
    std::vector<double> raw_;
    std::vector<double> values_;
    std::vector<int> labels_;
    std::vector<std::string> label_names_;
    bool normalized_ = false;
};

struct LoadOptions {
    bool has_header = true;
    /// Column holding the decision label; nullopt means last column.
    std::optional<std::size_t> label_column;
    /// Kind overrides keyed by condition-column name or decimal position.
    std::map<std::string, AttributeKind> declared_kinds;
    std::string name;
};

namespace detail {

inline std::string trim(std::string_view s)
{
    std::size_t b = 0, e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r' || s[b] == '\n')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r' || s[e - 1] == '\n')) --e;
    std::string out(s.substr(b, e - b));
    if (out.size() >= 2 && out.front() == '"' && out.back() == '"')
        out = out.substr(1, out.size() - 2);
    return out;
}

/// Splits one CSV record; double quotes may wrap a field containing commas.
inline std::vector<std::string> split_csv_line(const std::string& line)
{
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (char c : line) {
        if (c == '"') {
            quoted = !quoted;
        } else if (c == ',' && !quoted) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(trim(cur));
    return out;
}

inline std::optional<double> parse_number(const std::string& s)
{
    if (s.empty()) return std::nullopt;
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (*first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || !std::isfinite(v)) return std::nullopt;
    return v;
}

inline bool is_missing(const std::string& s) { return s.empty() || s == "?" || s == "NA"; }

inline std::vector<double> scale(const std::vector<double>& raw, std::size_t d,
                                 const std::vector<ColumnRange>& ranges)
{
    std::vector<double> out(raw.size());
    for (std::size_t k = 0; k < raw.size(); ++k) {
        const ColumnRange& r = ranges[k % d];
        double span = r.max - r.min;
        out[k] = span > 0.0 ? (raw[k] - r.min) / span : 0.0;
    }
    return out;
}

} // namespace detail

/// Reads a per-column kind sidecar: {"kinds": {"<column name or index>": "numeric"|"categorical"}}.
inline std::map<std::string, AttributeKind> load_schema(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open schema file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("schema '" + path + "': " + e.what());
    }
    std::map<std::string, AttributeKind> out;
    if (!j.contains("kinds") || !j["kinds"].is_object())
        throw ParseError("schema '" + path + "' lacks a \"kinds\" object");
    for (auto& [key, val] : j["kinds"].items()) {
        std::string k = val.get<std::string>();
        if (k == "numeric")
            out[key] = AttributeKind::numeric;
        else if (k == "categorical")
            out[key] = AttributeKind::categorical;
        else
            throw ParseError("schema '" + path + "': unknown kind '" + k + "'");
    }
    return out;
}

/// Parses CSV text. Categorical columns and labels are integer-coded in
/// first-appearance order. Values are left unnormalized.
inline DecisionSystem parse_csv(std::istream& in, const LoadOptions& opt = {})
{
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> line_no;
    std::vector<std::string> header;
    std::string line;
    std::size_t ln = 0;
    while (std::getline(in, line)) {
        ++ln;
        if (detail::trim(line).empty()) continue;
        auto fields = detail::split_csv_line(line);
        if (opt.has_header && header.empty() && rows.empty()) {
            header = std::move(fields);
            continue;
        }
        rows.push_back(std::move(fields));
        line_no.push_back(ln);
    }
    if (rows.empty()) throw ParseError("empty file: no data rows");

    const std::size_t cols = header.empty() ? rows.front().size() : header.size();
    if (cols < 2) throw ParseError("need at least one condition column and a label column");
    for (std::size_t r = 0; r < rows.size(); ++r)
        if (rows[r].size() != cols)
            throw ParseError("row " + std::to_string(line_no[r]) + ": expected " +
                             std::to_string(cols) + " columns, found " +
                             std::to_string(rows[r].size()));

    const std::size_t label_col = opt.label_column.value_or(cols - 1);
    if (label_col >= cols)
        throw ParseError("label column " + std::to_string(label_col) + " out of range");

    std::vector<std::size_t> cond_cols;
    for (std::size_t c = 0; c < cols; ++c)
        if (c != label_col) cond_cols.push_back(c);
    const std::size_t n = rows.size(), d = cond_cols.size();

    std::vector<AttributeMeta> attrs(d);
    for (std::size_t a = 0; a < d; ++a) {
        std::size_t c = cond_cols[a];
        attrs[a].name = header.empty() ? "a" + std::to_string(a) : header[c];
        std::optional<AttributeKind> declared;
        if (auto it = opt.declared_kinds.find(attrs[a].name); it != opt.declared_kinds.end())
            declared = it->second;
        else if (auto it2 = opt.declared_kinds.find(std::to_string(a));
                 it2 != opt.declared_kinds.end())
            declared = it2->second;

        for (std::size_t r = 0; r < n; ++r)
            if (detail::is_missing(rows[r][c]))
                throw ParseError("row " + std::to_string(line_no[r]) + ", column '" +
                                 attrs[a].name + "': missing value");

        if (declared) {
            attrs[a].kind = *declared;
        } else {
            bool numeric = true;
            for (std::size_t r = 0; r < n && numeric; ++r)
                numeric = detail::parse_number(rows[r][c]).has_value();
            attrs[a].kind = numeric ? AttributeKind::numeric : AttributeKind::categorical;
        }
    }

    std::vector<double> raw(n * d);
    for (std::size_t a = 0; a < d; ++a) {
        std::size_t c = cond_cols[a];
        std::unordered_map<std::string, std::size_t> codes;
        for (std::size_t r = 0; r < n; ++r) {
            const std::string& tok = rows[r][c];
            double v;
            if (attrs[a].kind == AttributeKind::numeric) {
                auto p = detail::parse_number(tok);
                if (!p)
                    throw ParseError("row " + std::to_string(line_no[r]) + ", column '" +
                                     attrs[a].name + "': non-numeric token '" + tok + "'");
                v = *p;
            } else {
                auto [it, fresh] = codes.try_emplace(tok, attrs[a].categories.size());
                if (fresh) attrs[a].categories.push_back(tok);
                v = static_cast<double>(it->second);
            }
            raw[r * d + a] = v;
        }
        double lo = raw[a], hi = raw[a];
        for (std::size_t r = 1; r < n; ++r) {
            lo = std::min(lo, raw[r * d + a]);
            hi = std::max(hi, raw[r * d + a]);
        }
        attrs[a].raw_min = lo;
        attrs[a].raw_max = hi;
    }

    std::vector<int> labels(n);
    std::vector<std::string> label_names;
    std::unordered_map<std::string, int> label_codes;
    for (std::size_t r = 0; r < n; ++r) {
        const std::string& tok = rows[r][label_col];
        if (tok.empty())
            throw ParseError("row " + std::to_string(line_no[r]) + ": empty label");
        auto [it, fresh] = label_codes.try_emplace(tok, static_cast<int>(label_names.size()));
        if (fresh) label_names.push_back(tok);
        labels[r] = it->second;
    }

    std::vector<double> values = raw;
    return DecisionSystem(opt.name, std::move(attrs), std::move(raw), std::move(values),
                          std::move(labels), std::move(label_names), false);
}

inline DecisionSystem load_csv(const std::string& path, LoadOptions opt = {})
{
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open data file '" + path + "'");
    if (opt.name.empty()) {
        auto slash = path.find_last_of("/\\");
        std::string base = slash == std::string::npos ? path : path.substr(slash + 1);
        auto dot = base.find_last_of('.');
        opt.name = dot == std::string::npos ? base : base.substr(0, dot);
    }
    try {
        return parse_csv(in, opt);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

inline std::vector<ColumnRange> column_ranges(const DecisionSystem& ds)
{
    std::vector<ColumnRange> r(ds.attribute_count());
    for (std::size_t a = 0; a < r.size(); ++a) {
        if (ds.size() == 0) continue;
        r[a] = {ds.raw(0, a), ds.raw(0, a)};
        for (std::size_t i = 1; i < ds.size(); ++i) {
            r[a].min = std::min(r[a].min, ds.raw(i, a));
            r[a].max = std::max(r[a].max, ds.raw(i, a));
        }
    }
    return r;
}

/// Min-max scales every column with the given raw ranges. Rows outside a
/// range (held-out folds) land outside [0,1]; constant columns become 0.
inline DecisionSystem normalize(const DecisionSystem& ds, const std::vector<ColumnRange>& ranges)
{
    require(ranges.size() == ds.attribute_count(), "range count does not match attribute count");
    return DecisionSystem(ds.name(), ds.attributes(), ds.raw_matrix(),
                          detail::scale(ds.raw_matrix(), ds.attribute_count(), ranges),
                          ds.labels(), ds.label_names(), true);
}

/// Min-max scaling from the system's own raw ranges. Idempotent.
inline DecisionSystem normalize(const DecisionSystem& ds)
{
    return normalize(ds, column_ranges(ds));
}

/// Rows `ids` (in that order) as a new system; sample ids are renumbered
/// 0..m-1. The label space is kept so class ids stay comparable.
inline DecisionSystem select_rows(const DecisionSystem& ds, std::span<const std::size_t> ids)
{
    const std::size_t d = ds.attribute_count();
    std::vector<double> raw, values;
    std::vector<int> labels;
    raw.reserve(ids.size() * d);
    values.reserve(ids.size() * d);
    for (std::size_t i : ids) {
        require(i < ds.size(), "row id out of range");
        auto rr = ds.raw_row(i);
        auto vr = ds.row(i);
        raw.insert(raw.end(), rr.begin(), rr.end());
        values.insert(values.end(), vr.begin(), vr.end());
        labels.push_back(ds.label(i));
    }
    std::vector<AttributeMeta> attrs = ds.attributes();
    for (std::size_t a = 0; a < d && !ids.empty(); ++a) {
        double lo = raw[a], hi = raw[a];
        for (std::size_t r = 1; r < ids.size(); ++r) {
            lo = std::min(lo, raw[r * d + a]);
            hi = std::max(hi, raw[r * d + a]);
        }
        attrs[a].raw_min = lo;
        attrs[a].raw_max = hi;
    }
    return DecisionSystem(ds.name(), std::move(attrs), std::move(raw), std::move(values),
                          std::move(labels), ds.label_names(), ds.normalized());
}

/// Minkowski order; 2 is Euclidean (the default everywhere).
struct Metric {
    double p = 2.0;

    double operator()(std::span<const double> x, std::span<const double> y) const
    {
        require(x.size() == y.size(), "dimension mismatch");
        if (p == 2.0) {
            double s = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) {
                double t = x[i] - y[i];
                s += t * t;
            }
            return std::sqrt(s);
        }
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) s += std::pow(std::abs(x[i] - y[i]), p);
        return std::pow(s, 1.0 / p);
    }
};

/// Row i restricted to B, as a dense vector.
inline std::vector<double> project(const DecisionSystem& ds, const AttributeSubset& B, std::size_t i)
{
    std::vector<double> out(B.size());
    for (std::size_t k = 0; k < B.size(); ++k) out[k] = ds.value(i, B[k]);
    return out;
}

/// Distance between row i restricted to B and a point given over B.
inline double project_distance(const DecisionSystem& ds, const AttributeSubset& B, std::size_t i,
                               std::span<const double> point, Metric metric = {})
{
    require(point.size() == B.size(), "point length " + std::to_string(point.size()) +
                                          " does not match subset size " +
                                          std::to_string(B.size()));
    require(i < ds.size(), "sample id out of range");
    auto x = project(ds, B, i);
    return metric(x, point);
}

} // namespace gbrs

#endif // GBRS_DATASET_HPP
