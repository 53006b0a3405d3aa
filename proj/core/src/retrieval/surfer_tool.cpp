#include "dr/retrieval/surfer_tool.hpp"

#include <fmt/format.h>

#include "dr/error.hpp"

namespace dr::retrieval {

using agent::Json;
using agent::ToolResult;

std::shared_ptr<agent::Tool> make_batch_web_surfer_tool(std::shared_ptr<SearchService> service) {
  return std::make_shared<agent::FunctionTool>(
      "batch_web_surfer",
      "Search the document collection: {\"queries\": [...], \"k\"?, \"sites\"?, "
      "\"published_after\"?}. Cite hits by their [key].",
      [service = std::move(service)](const Json& args) -> ToolResult {
        ToolResult out;
        const auto qs = args.find("queries");
        if (qs == args.end() || !qs->is_array() || qs->empty()) {
          return {"queries must be a nonempty array of strings", true, false, {}};
        }
        SearchParams params;
        params.k = args.value("k", std::size_t{5});
        if (params.k == 0) return {"k must be at least 1", true, false, {}};
        if (auto s = args.find("sites"); s != args.end() && s->is_array()) {
          params.sites = s->get<std::vector<std::string>>();
        }
        try {
          if (auto p = args.find("published_after"); p != args.end() && p->is_string()) {
            params.published_after = parse_rfc3339(p->get<std::string>());
          }
        } catch (const Error& e) {
          return {std::string("published_after: ") + e.what(), true, false, {}};
        }

        std::size_t failures = 0;
        for (const auto& q : *qs) {
          if (!q.is_string()) {
            ++failures;
            out.content += "## query: (not a string)\nerror: invalid_argument\n\n";
            continue;
          }
          const auto query = q.get<std::string>();
          out.content += fmt::format("## query: {}\n", query);
          try {
            const auto hits = service->search(query, params);
            if (hits.empty()) out.content += "(no results)\n";
            for (const auto& h : hits) {
              out.content += fmt::format("[{}] {}{}\n{}\n", h.para_id, h.site,
                                         h.authoritative ? " (authoritative)" : "", h.snippet);
              out.sources.push_back({h.para_id, h.doc_id + " @ " + h.site});
            }
          } catch (const Error& e) {
            ++failures;
            out.content += fmt::format("error: {}: {}\n", error_code_name(e.code()), e.what());
          }
          out.content += "\n";
        }
        out.is_error = failures == qs->size();
        return out;
      });
}

}  // namespace dr::retrieval
