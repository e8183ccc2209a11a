#include "catrag/eval.hpp"
#include "catrag/errors.hpp"
#include "catrag/util.hpp"

#include <json.hpp>

#include <algorithm>

namespace catrag {

using json = nlohmann::json;

namespace {

const char* kSyllables[] = {"ba", "ce", "di", "fo", "gu", "ha", "je", "ki", "lo", "mu",
                            "na", "pe", "ri", "so", "tu", "va", "we", "xi", "yo", "zu"};
constexpr size_t kSyllableCount = sizeof(kSyllables) / sizeof(kSyllables[0]);

// Deterministic pseudoword for an index; unique per index.
std::string pseudoword(uint64_t index) {
    std::string w;
    uint64_t v = index;
    for (int i = 0; i < 3; ++i) {
        w += kSyllables[v % kSyllableCount];
        v /= kSyllableCount;
    }
    if (v > 0) w += std::to_string(v);
    return w;
}

std::string title_case(const std::string& s) {
    std::string out = s;
    bool start = true;
    for (auto& c : out) {
        if (c == ' ') {
            start = true;
        } else if (start) {
            c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
            start = false;
        }
    }
    return out;
}

// Predicate pools are generated from disjoint pseudoword ranges: three unique
// tokens per predicate, no token shared between any two predicates or with
// entity names. Chain facts and hub/noise facts therefore never collide in
// the lexical embedding space, and cross-query collisions stay rare.
constexpr size_t kChainPredicateCount = 4096;
constexpr size_t kNoisePredicateCount = 32;

// Fact form: six unique tokens, well above hash-collision noise. Question
// form: the first three tokens only, the way a question paraphrases a fact
// without quoting it; later-hop facts are therefore retrievable but weakly.
std::string chain_predicate(size_t i) {
    uint64_t base = 100000 + 6 * static_cast<uint64_t>(i);
    std::string out = pseudoword(base);
    for (uint64_t k = 1; k < 6; ++k) out += " " + pseudoword(base + k);
    return out;
}

std::string question_form(const std::string& predicate) {
    size_t spaces = 0, cut = predicate.size();
    for (size_t i = 0; i < predicate.size(); ++i) {
        if (predicate[i] == ' ' && ++spaces == 3) {
            cut = i;
            break;
        }
    }
    return predicate.substr(0, cut);
}

std::string noise_predicate(size_t i) {
    uint64_t base = 200000 + 6 * static_cast<uint64_t>(i);
    std::string out = pseudoword(base);
    for (uint64_t k = 1; k < 6; ++k) out += " " + pseudoword(base + k);
    return out;
}

std::string fact_sentence(const std::string& subject, const std::string& predicate,
                          const std::string& object) {
    return title_case(subject) + " " + predicate + " " + title_case(object) + ".";
}

} // namespace

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
    if (spec.n_queries < 1) throw Error::infeasible_spec("n_queries must be >= 1");
    if (spec.hops_min < 2 || spec.hops_max > 4 || spec.hops_min > spec.hops_max) {
        throw Error::infeasible_spec("hops range must satisfy 2 <= min <= max <= 4");
    }
    if (spec.n_distractor_passages < 1) {
        throw Error::infeasible_spec("need at least one distractor passage");
    }
    if (spec.hub_degree > spec.n_distractor_passages) {
        throw Error::infeasible_spec("hub_degree " + std::to_string(spec.hub_degree) +
                                     " exceeds distractor passage budget " +
                                     std::to_string(spec.n_distractor_passages));
    }
    if (spec.n_hub_entities < 0 || spec.hub_degree < 0) {
        throw Error::infeasible_spec("hub counts must be non-negative");
    }

    Rng rng(spec.seed * 0x9e3779b97f4a7c15ull + 0x1234abcd);
    SyntheticData data;

    const int n_fillers = spec.n_distractor_passages;
    auto filler_name = [&](int i) { return pseudoword(900000 + static_cast<uint64_t>(i)) + " office"; };
    auto hub_name = [&](int h) { return pseudoword(800000 + static_cast<uint64_t>(h)) + " exchange"; };
    auto chain_name = [&](int q, int j) {
        uint64_t idx = static_cast<uint64_t>(q) * 16 + static_cast<uint64_t>(j);
        return pseudoword(2 * idx) + " " + pseudoword(2 * idx + 1);
    };
    auto decoy_name = [&](int q) { return pseudoword(700000 + static_cast<uint64_t>(q)) + " " +
                                          pseudoword(750000 + static_cast<uint64_t>(q)); };

    // Distractor passages: one filler fact each; hub wiring and chain-to-hub
    // links are housed here too, so the text is assembled at the end.
    std::vector<std::vector<std::string>> distractor_sentences(
        static_cast<size_t>(spec.n_distractor_passages));
    auto distractor_doc = [](int i) { return "d" + std::to_string(i); };

    struct PendingTriple {
        std::string subject, predicate, object;
        int distractor = -1;   // housed in distractor passage
        std::string gold_doc;  // or in a gold chain passage
    };
    std::vector<PendingTriple> triples;

    for (int i = 0; i < n_fillers; ++i) {
        int other = static_cast<int>(rng.next_below(static_cast<uint64_t>(n_fillers)));
        if (other == i) other = (other + 1) % n_fillers;
        PendingTriple t;
        t.subject = filler_name(i);
        t.predicate = noise_predicate(rng.next_below(kNoisePredicateCount));
        t.object = filler_name(other);
        t.distractor = i;
        triples.push_back(std::move(t));
    }

    // Hub wiring: hub_degree facts per hub, each housed in a distinct
    // distractor passage, pulling walk mass onto the distractor bed.
    for (int h = 0; h < spec.n_hub_entities; ++h) {
        std::vector<int> targets(static_cast<size_t>(n_fillers));
        for (int i = 0; i < n_fillers; ++i) targets[static_cast<size_t>(i)] = i;
        rng.shuffle(targets);
        for (int k = 0; k < spec.hub_degree; ++k) {
            int i = targets[static_cast<size_t>(k)];
            PendingTriple t;
            t.subject = hub_name(h);
            t.predicate = noise_predicate(rng.next_below(kNoisePredicateCount));
            t.object = filler_name(i);
            t.distractor = i;
            triples.push_back(std::move(t));
        }
    }

    // Planted chains.
    for (int q = 0; q < spec.n_queries; ++q) {
        int hops = spec.hops_min +
                   static_cast<int>(rng.next_below(
                       static_cast<uint64_t>(spec.hops_max - spec.hops_min + 1)));
        std::vector<std::string> entities;
        for (int j = 0; j <= hops; ++j) entities.push_back(chain_name(q, j));
        std::vector<std::string> predicates;
        size_t pred_offset = rng.next_below(kChainPredicateCount);
        for (int j = 0; j < hops; ++j) {
            predicates.push_back(chain_predicate((pred_offset + static_cast<size_t>(j) * 5) %
                                                 kChainPredicateCount));
        }

        EvalQuery query;
        query.qid = "q" + std::to_string(q);
        query.hops = hops;
        std::vector<std::string> chain_sentences;
        for (int j = 0; j < hops; ++j) {
            std::string gold_doc = query.qid + "_gold" + std::to_string(j);
            query.gold_docs.push_back(gold_doc);
            PendingTriple t;
            t.subject = entities[static_cast<size_t>(j)];
            t.predicate = predicates[static_cast<size_t>(j)];
            t.object = entities[static_cast<size_t>(j + 1)];
            t.gold_doc = gold_doc;
            chain_sentences.push_back(fact_sentence(t.subject, t.predicate, t.object));
            triples.push_back(std::move(t));
            query.chain_pairs.emplace_back(entities[static_cast<size_t>(j)],
                                           entities[static_cast<size_t>(j + 1)]);

            CorpusDocument doc;
            doc.doc_id = gold_doc;
            doc.title = title_case(entities[static_cast<size_t>(j)]);
            doc.text = chain_sentences.back();
            data.corpus.push_back(std::move(doc));
        }

        // Hub pull: every chain entity on the walk carries a dominant-weight
        // edge into a hub (the same extraction repeated, so the relation edge
        // accumulates weight), with the fact buried in a distractor passage.
        if (spec.n_hub_entities > 0) {
            for (int j = 0; j < hops; ++j) {
                int h = static_cast<int>(rng.next_below(static_cast<uint64_t>(spec.n_hub_entities)));
                int dp = static_cast<int>(rng.next_below(static_cast<uint64_t>(n_fillers)));
                PendingTriple t;
                t.subject = entities[static_cast<size_t>(j)];
                t.predicate = noise_predicate(rng.next_below(kNoisePredicateCount));
                t.object = hub_name(h);
                t.distractor = dp;
                for (int rep = 0; rep < 3; ++rep) triples.push_back(t);
            }
        }

        if (spec.claim_mode) {
            bool supported = rng.next_below(2) == 0;
            std::string terminal = supported ? entities.back() : decoy_name(q);
            std::string claim;
            for (int j = 0; j < hops; ++j) {
                std::string obj = (j == hops - 1) ? terminal : entities[static_cast<size_t>(j + 1)];
                if (!claim.empty()) claim += " ";
                claim += fact_sentence(entities[static_cast<size_t>(j)],
                                       predicates[static_cast<size_t>(j)], obj);
            }
            query.question = claim;
            query.gold_answer = supported ? "SUPPORTED" : "NOT_SUPPORTED";
        } else {
            std::string question = "Starting at " + title_case(entities.front()) +
                                   ": which entity is reached when it " + predicates[0];
            for (int j = 1; j < hops; ++j) {
                question += ", and that entity " + question_form(predicates[static_cast<size_t>(j)]);
            }
            question += "?";
            query.question = question;
            query.gold_answer = title_case(entities.back());
        }
        data.queries.push_back(std::move(query));
    }

    // Materialize triples + distractor passages.
    for (const auto& t : triples) {
        if (t.distractor >= 0) {
            distractor_sentences[static_cast<size_t>(t.distractor)].push_back(
                fact_sentence(t.subject, t.predicate, t.object));
        }
    }
    for (int i = 0; i < spec.n_distractor_passages; ++i) {
        CorpusDocument doc;
        doc.doc_id = distractor_doc(i);
        doc.title = title_case(filler_name(i));
        std::string text;
        for (const auto& s : distractor_sentences[static_cast<size_t>(i)]) {
            if (!text.empty()) text += " ";
            text += s;
        }
        doc.text = text.empty() ? title_case(filler_name(i)) + " keeps quiet records." : text;
        data.corpus.push_back(std::move(doc));
    }

    data.triples.reserve(triples.size());
    for (const auto& t : triples) {
        TripleInput in;
        in.subject = t.subject;
        in.predicate = t.predicate;
        in.object = t.object;
        in.source_doc_id = t.distractor >= 0 ? distractor_doc(t.distractor) : t.gold_doc;
        data.triples.push_back(std::move(in));
    }

    // stable corpus order: gold passages were appended per query before the
    // distractor bed; sort by doc_id for a layout independent of query count
    std::sort(data.corpus.begin(), data.corpus.end(),
              [](const CorpusDocument& a, const CorpusDocument& b) { return a.doc_id < b.doc_id; });
    return data;
}

void write_synthetic(const SyntheticData& data, const std::string& dir) {
    std::string corpus;
    for (const auto& d : data.corpus) {
        corpus += json{{"doc_id", d.doc_id}, {"title", d.title}, {"text", d.text}}.dump();
        corpus += '\n';
    }
    std::string triples;
    for (const auto& t : data.triples) {
        triples += json{{"subject", t.subject},
                        {"predicate", t.predicate},
                        {"object", t.object},
                        {"source_passage", t.source_doc_id}}
                       .dump();
        triples += '\n';
    }
    write_file(dir + "/corpus.jsonl", corpus);
    write_file(dir + "/triples.jsonl", triples);
    write_queries_jsonl(data.queries, dir + "/queries.jsonl");
}

void write_queries_jsonl(const std::vector<EvalQuery>& queries, const std::string& path) {
    std::string out;
    for (const auto& q : queries) {
        json chain = json::array();
        for (const auto& [a, b] : q.chain_pairs) chain.push_back({a, b});
        json j{{"qid", q.qid},
               {"question", q.question},
               {"gold_docs", q.gold_docs},
               {"gold_answer", q.gold_answer},
               {"hops", q.hops}};
        if (!chain.empty()) j["chain"] = chain;
        out += j.dump();
        out += '\n';
    }
    write_file(path, out);
}

std::vector<EvalQuery> parse_queries_jsonl(const std::string& path) {
    std::vector<EvalQuery> queries;
    std::string text = read_file(path);
    size_t start = 0, line_no = 1;
    while (start < text.size()) {
        size_t end = text.find('\n', start);
        if (end == std::string::npos) end = text.size();
        std::string_view line(text.data() + start, end - start);
        if (!line.empty() && line.find_first_not_of(" \t\r") != std::string_view::npos) {
            json j = json::parse(line, nullptr, false);
            if (j.is_discarded() || !j.is_object()) {
                throw Error::parse(path + ":" + std::to_string(line_no) + ": invalid JSON object");
            }
            EvalQuery q;
            try {
                q.qid = j.at("qid").get<std::string>();
                q.question = j.at("question").get<std::string>();
                q.gold_docs = j.at("gold_docs").get<std::vector<std::string>>();
                q.gold_answer = j.value("gold_answer", "");
                q.hops = j.value("hops", 1);
            } catch (const json::exception& e) {
                throw Error::parse(path + ":" + std::to_string(line_no) + ": " + e.what());
            }
            if (q.gold_docs.empty()) {
                throw Error::parse(path + ":" + std::to_string(line_no) + ": empty gold_docs");
            }
            if (j.contains("chain")) {
                for (const auto& pair : j["chain"]) {
                    q.chain_pairs.emplace_back(pair.at(0).get<std::string>(),
                                               pair.at(1).get<std::string>());
                }
            }
            queries.push_back(std::move(q));
        }
        start = end + 1;
        ++line_no;
    }
    return queries;
}

} // namespace catrag
