#pragma once

#include <memory>

#include "dr/agent/tools.hpp"
#include "dr/retrieval/search.hpp"

namespace dr::retrieval {

/// `batch_web_surfer`: {"queries": [...], "k"?, "sites"?, "published_after"?}.
/// Returns one hit list per query; every hit is exposed as a citable source
/// keyed by its paragraph id.
std::shared_ptr<agent::Tool> make_batch_web_surfer_tool(std::shared_ptr<SearchService> service);

}  // namespace dr::retrieval
