#pragma once

#include "focal/config.hpp"
#include "focal/dataset.hpp"

namespace focal::data {

// Materializes the experiment pool a config describes: IDX ingestion,
// synthetic digit rendering, or 2-D Gaussian clusters. Pure function of
// (config, seed).
LabeledPool build_pool(const cfg::RunConfig& config);

// "0:0,1:1,default:2" -> explicit mapping plus optional fallback class
struct CollapseRule {
    std::unordered_map<int, int> explicit_map;
    int fallback = -1; // -1: none
    bool has_fallback = false;
};
CollapseRule parse_collapse(const std::string& text);

// applies a collapse rule in place; returns 1 + highest class produced
int apply_collapse(std::vector<Item>& items, const CollapseRule& rule);

ClusterSpec cluster_spec_from(const cfg::RunConfig& config);

} // namespace focal::data
