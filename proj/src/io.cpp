#include "cqc/io.hpp"

#include "cqc/error.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <system_error>
#include <vector>

namespace cqc::io {

namespace {

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_fields(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

std::optional<double> parse_number(std::string_view field)
{
    if (!field.empty() && field.front() == '+') field.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) return std::nullopt;
    return v;
}

[[noreturn]] void fail(std::string_view source, std::size_t line, const std::string& what)
{
    throw DataError(std::string(source) + ": line " + std::to_string(line) + ": " + what);
}

} // namespace

std::string format_double(double v)
{
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, ptr};
}

Dataset parse_dataset_csv(std::istream& in, std::string_view source)
{
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!trim(line).empty()) break;
    }
    if (trim(line).empty()) throw DataError(std::string(source) + ": empty file");

    const auto header = split_fields(line);
    std::optional<std::size_t> y_col;
    std::optional<std::size_t> a_col;
    std::map<std::size_t, std::size_t> x_cols; // covariate number -> column
    for (std::size_t c = 0; c < header.size(); ++c) {
        const auto name = header[c];
        if (name == "y") {
            y_col = c;
        } else if (name == "a") {
            a_col = c;
        } else if (name.size() > 1 && name.front() == 'x') {
            std::size_t k = 0;
            const auto [ptr, ec] = std::from_chars(name.data() + 1, name.data() + name.size(), k);
            if (ec == std::errc() && ptr == name.data() + name.size() && k > 0) {
                if (!x_cols.emplace(k, c).second) fail(source, line_no, "duplicate column " + std::string(name));
            }
        }
    }
    if (!y_col) fail(source, line_no, "missing column 'y'");
    if (!a_col) fail(source, line_no, "missing column 'a'");
    if (x_cols.empty()) fail(source, line_no, "missing covariate columns x1..xd");
    const std::size_t dim = x_cols.size();
    if (x_cols.rbegin()->first != dim) {
        fail(source, line_no, "covariate columns must be numbered x1..x" + std::to_string(dim) + " without gaps");
    }

    Dataset data(dim);
    std::vector<double> x(dim);
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split_fields(line);
        if (fields.size() != header.size()) {
            fail(source, line_no, "expected " + std::to_string(header.size()) + " fields, found " + std::to_string(fields.size()));
        }
        auto number = [&](std::size_t col, std::string_view name) {
            const auto v = parse_number(fields[col]);
            if (!v) fail(source, line_no, "field '" + std::string(name) + "' is not a number: '" + std::string(fields[col]) + "'");
            if (!std::isfinite(*v)) fail(source, line_no, "field '" + std::string(name) + "' is not finite");
            return *v;
        };
        const double y = number(*y_col, "y");
        const double a = number(*a_col, "a");
        if (a != 0.0 && a != 1.0) fail(source, line_no, "treatment 'a' must be 0 or 1, got " + std::string(fields[*a_col]));
        for (const auto& [k, col] : x_cols) x[k - 1] = number(col, header[col]);
        data.add(y, x, static_cast<int>(a));
    }
    if (data.empty()) throw DataError(std::string(source) + ": no data rows");
    return data;
}

Dataset read_dataset_csv(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    return parse_dataset_csv(in, path.string());
}

std::string dataset_csv(const Dataset& data)
{
    std::string out = "y,a";
    for (std::size_t k = 1; k <= data.dim(); ++k) out += ",x" + std::to_string(k);
    out += '\n';
    for (std::size_t i = 0; i < data.size(); ++i) {
        out += format_double(data.y(i));
        out += data.a(i) == 1 ? ",1" : ",0";
        for (double v : data.x(i)) {
            out += ',';
            out += format_double(v);
        }
        out += '\n';
    }
    return out;
}

std::string error_report_csv(const ErrorReport& report)
{
    std::string out = "estimator,mean_abs_error,ci_low,ci_high,replications\n";
    for (const auto& e : report.estimators) {
        out += e.estimator + ',' + format_double(e.mean_abs_error) + ',' + format_double(e.ci_low()) + ','
            + format_double(e.ci_high()) + ',' + std::to_string(e.replications) + '\n';
    }
    return out;
}

std::string error_report_json(const ErrorReport& report)
{
    using nlohmann::json;
    const auto& c = report.config;
    json cfg = {
        {"dgp", std::string(to_string(c.dgp.family))},
        {"gamma", c.dgp.gamma},
        {"dgp_seed", c.dgp.seed},
        {"n_total", c.n_total},
        {"replications", c.replications},
        {"holdout", c.holdout},
        {"seed", c.seed},
    };
    if (!c.dgp.beta.empty()) cfg["beta"] = c.dgp.beta;
    json estimators = json::array();
    for (std::size_t i = 0; i < report.estimators.size(); ++i) {
        const auto& e = report.estimators[i];
        const auto& ec = c.estimators.at(i);
        auto finite_or_null = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
        estimators.push_back({
            {"estimator", e.estimator},
            {"mean_abs_error", finite_or_null(e.mean_abs_error)},
            {"ci_low", finite_or_null(e.ci_low())},
            {"ci_high", finite_or_null(e.ci_high())},
            {"sd", finite_or_null(e.sd)},
            {"replications", e.replications},
            {"failures", e.failures},
            {"nuisance_bandwidth", ec.contrast.nuisance_kernel.bandwidth},
            {"outer_bandwidth", ec.contrast.outer_kernel.bandwidth},
            {"kernel", std::string(to_string(ec.contrast.nuisance_kernel.family))},
            {"xi", ec.contrast.xi},
            {"cross_fit", ec.cross_fit},
        });
    }
    return json{{"config", cfg}, {"estimators", estimators}}.dump(2) + '\n';
}

std::string surface_csv(const Surface& surface)
{
    std::string out = "y";
    for (std::size_t j = 0; j < surface.xs.size(); ++j) out += ',' + format_double(surface.xs.row(j)[0]);
    out += '\n';
    for (std::size_t i = 0; i < surface.ys.size(); ++i) {
        out += format_double(surface.ys[i]);
        for (std::size_t j = 0; j < surface.xs.size(); ++j) out += ',' + format_double(surface.at(i, j));
        out += '\n';
    }
    return out;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content)
{
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw DataError("failed writing " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw DataError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

} // namespace cqc::io
