#include "catrag/dataset_loaders.hpp"
#include "catrag/errors.hpp"
#include "catrag/util.hpp"

#include <json.hpp>

#include <unordered_set>

namespace catrag {

using json = nlohmann::json;

namespace {

void add_doc(LoadedDataset& out, std::unordered_set<std::string>& seen, const std::string& title,
             const std::string& text) {
    if (title.empty() || text.empty()) return;
    if (!seen.insert(title).second) return;
    out.corpus.push_back({title, title, text});
}

int hops_from_musique_id(const std::string& id) {
    // ids look like "2hop__1234_5678"
    size_t pos = id.find("hop");
    if (pos == std::string::npos || pos == 0) return 2;
    char c = id[pos - 1];
    return (c >= '2' && c <= '9') ? c - '0' : 2;
}

} // namespace

LoadedDataset load_musique_jsonl(const std::string& path) {
    LoadedDataset out;
    std::unordered_set<std::string> seen;
    std::string text = read_file(path);
    size_t start = 0, line_no = 1;
    while (start < text.size()) {
        size_t end = text.find('\n', start);
        if (end == std::string::npos) end = text.size();
        std::string_view line(text.data() + start, end - start);
        start = end + 1;
        ++line_no;
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded()) {
            throw Error::parse(path + ":" + std::to_string(line_no - 1) + ": invalid JSON");
        }
        EvalQuery q;
        q.qid = j.value("id", "line" + std::to_string(line_no - 1));
        q.question = j.value("question", "");
        q.gold_answer = j.value("answer", "");
        q.hops = hops_from_musique_id(q.qid);
        for (const auto& p : j.value("paragraphs", json::array())) {
            std::string title = p.value("title", "");
            std::string body = p.value("paragraph_text", "");
            add_doc(out, seen, title, body);
            if (p.value("is_supporting", false)) q.gold_docs.push_back(title);
        }
        if (!q.question.empty() && !q.gold_docs.empty()) out.queries.push_back(std::move(q));
    }
    return out;
}

LoadedDataset load_hotpot_style_json(const std::string& path) {
    json root = json::parse(read_file(path), nullptr, false);
    if (root.is_discarded() || !root.is_array()) {
        throw Error::parse(path + ": expected a JSON array");
    }
    LoadedDataset out;
    std::unordered_set<std::string> seen;
    for (const auto& j : root) {
        EvalQuery q;
        q.qid = j.value("_id", j.value("id", ""));
        q.question = j.value("question", "");
        q.gold_answer = j.value("answer", "");
        q.hops = 2;
        for (const auto& ctx : j.value("context", json::array())) {
            if (!ctx.is_array() || ctx.size() < 2) continue;
            std::string title = ctx[0].get<std::string>();
            std::string body;
            for (const auto& sent : ctx[1]) body += sent.get<std::string>();
            add_doc(out, seen, title, body);
        }
        std::unordered_set<std::string> gold_seen;
        for (const auto& sf : j.value("supporting_facts", json::array())) {
            if (!sf.is_array() || sf.empty()) continue;
            std::string title = sf[0].get<std::string>();
            if (gold_seen.insert(title).second) q.gold_docs.push_back(title);
        }
        if (!q.question.empty() && !q.gold_docs.empty()) out.queries.push_back(std::move(q));
    }
    return out;
}

LoadedDataset load_hover_json(const std::string& path) {
    json root = json::parse(read_file(path), nullptr, false);
    if (root.is_discarded() || !root.is_array()) {
        throw Error::parse(path + ": expected a JSON array");
    }
    LoadedDataset out;
    for (const auto& j : root) {
        EvalQuery q;
        q.qid = j.value("uid", "");
        q.question = j.value("claim", "");
        q.gold_answer = j.value("label", "");
        q.hops = j.value("num_hops", 3);
        std::unordered_set<std::string> gold_seen;
        for (const auto& sf : j.value("supporting_facts", json::array())) {
            if (!sf.is_array() || sf.empty()) continue;
            std::string title = sf[0].get<std::string>();
            if (gold_seen.insert(title).second) q.gold_docs.push_back(title);
        }
        if (!q.question.empty() && !q.gold_docs.empty()) out.queries.push_back(std::move(q));
    }
    return out;
}

} // namespace catrag
