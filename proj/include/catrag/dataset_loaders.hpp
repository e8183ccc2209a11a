#pragma once
#include "catrag/eval.hpp"

#include <string>
#include <vector>

namespace catrag {

// Parsers for the common multi-hop benchmark layouts. They only translate the
// published JSON into corpus documents and eval queries; fetching the data is
// up to the operator. Passages are deduplicated by title (the doc id).
struct LoadedDataset {
    std::vector<CorpusDocument> corpus;
    std::vector<EvalQuery> queries;
};

// JSONL, one record per question with a `paragraphs` array flagged by
// `is_supporting`.
LoadedDataset load_musique_jsonl(const std::string& path);

// JSON array with `context` as [title, [sentences...]] pairs plus
// `supporting_facts`; covers both HotpotQA and 2WikiMultiHopQA.
LoadedDataset load_hotpot_style_json(const std::string& path);

// JSON array of claims with `supporting_facts` and a SUPPORTED/NOT_SUPPORTED
// label; the passage corpus ships separately.
LoadedDataset load_hover_json(const std::string& path);

} // namespace catrag
