#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>

namespace milstroud {

enum class AggregateFunction { Max, Min, Mean, Median, Dspread, Spread };

inline constexpr std::array<AggregateFunction, 6> kAllAggregates = {
    AggregateFunction::Max,    AggregateFunction::Min,     AggregateFunction::Mean,
    AggregateFunction::Median, AggregateFunction::Dspread, AggregateFunction::Spread};

/// Lowercase config name: max|min|mean|median|dspread|spread.
std::string_view to_string(AggregateFunction f);
AggregateFunction parse_aggregate(std::string_view name);

/// Collapses instance strangeness values into one bag score.
///
/// dspread = mean + 2 * stdev and spread = mean * stdev, where stdev is the
/// population standard deviation. The median of an even-length vector is the
/// mean of the two central order statistics. Throws std::invalid_argument on
/// an empty or non-finite input.
double aggregate(std::span<const double> scores, AggregateFunction f);

}  // namespace milstroud
