// JSON helpers for Eigen types. Doubles round-trip exactly through nlohmann's
// shortest-representation formatting.
#pragma once

#include <Eigen/Dense>
#include <string>

#include "json.hpp"

#include "hyperfc/core/error.hpp"

namespace hyperfc {

using Json = nlohmann::json;

template <typename Derived>
Json to_json_array(const Eigen::DenseBase<Derived>& v) {
    Json a = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v.derived()(i));
    return a;
}

template <typename VecT>
VecT from_json_array(const Json& j, Eigen::Index expected = -1) {
    if (!j.is_array()) throw IoError("expected JSON array");
    const auto n = static_cast<Eigen::Index>(j.size());
    if (expected >= 0 && n != expected)
        throw IoError("expected array of " + std::to_string(expected) + " values, got " + std::to_string(n));
    VecT v;
    if constexpr (VecT::SizeAtCompileTime == Eigen::Dynamic) v.resize(n);
    else if (n != VecT::SizeAtCompileTime) throw IoError("array length mismatch");
    for (Eigen::Index i = 0; i < n; ++i) v(i) = j[static_cast<std::size_t>(i)].get<double>();
    return v;
}

}  // namespace hyperfc
