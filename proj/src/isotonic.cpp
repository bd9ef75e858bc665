#include "cqc/isotonic.hpp"

#include "cqc/error.hpp"

namespace cqc {

IsotonicResult pava_project(std::span<const double> values)
{
    if (values.empty()) throw UsageError("isotonic projection of an empty sequence");

    struct Block {
        double sum;
        std::size_t count;
        double mean() const { return sum / static_cast<double>(count); }
    };
    std::vector<Block> stack;
    stack.reserve(values.size());
    for (double v : values) {
        stack.push_back({v, 1});
        while (stack.size() > 1 && stack[stack.size() - 2].mean() > stack.back().mean()) {
            const auto top = stack.back();
            stack.pop_back();
            stack.back().sum += top.sum;
            stack.back().count += top.count;
        }
    }

    IsotonicResult result;
    result.input_length = values.size();
    result.projected.reserve(values.size());
    for (const auto& b : stack) result.projected.insert(result.projected.end(), b.count, b.mean());
    return result;
}

bool is_nondecreasing(std::span<const double> values, double tolerance) noexcept
{
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] < values[i - 1] - tolerance) return false;
    }
    return true;
}

} // namespace cqc
