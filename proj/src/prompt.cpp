#include "pidlr/prompt.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "pidlr/errors.hpp"

namespace pidlr {

SegmentStats segment_stats(const std::string& s) {
    SegmentStats st;
    st.chars = s.size();
    bool in_token = false;
    for (char c : s) {
        bool ws = std::isspace(static_cast<unsigned char>(c)) != 0;
        if (!ws && !in_token) ++st.whitespace_tokens;
        in_token = !ws;
    }
    return st;
}

std::string quote_title(const std::string& title) {
    if (title.find(',') == std::string::npos && title.find('{') == std::string::npos &&
        title.find('}') == std::string::npos)
        return title;
    std::string out = "\"";
    for (char c : title) {
        out += c;
        if (c == '"') out += '"';
    }
    out += "\"";
    return out;
}

namespace {

const std::string& relation_name(const KnowledgeGraph& g, int32_t r) {
    if (r < 0 || r >= static_cast<int32_t>(g.relation_names.size()))
        throw RenderError("unresolvable relation id " + std::to_string(r));
    return g.relation_names[static_cast<size_t>(r)];
}

const std::string& entity_name(const KnowledgeGraph& g, int32_t e) {
    if (e < 0 || e >= static_cast<int32_t>(g.entity_names.size()))
        throw RenderError("unresolvable entity id " + std::to_string(e));
    return g.entity_names[static_cast<size_t>(e)];
}

}  // namespace

std::string render_user_hint_prompt(const std::vector<UserHint>& hints, const KnowledgeGraph& g) {
    std::string out;
    for (size_t i = 0; i < hints.size(); ++i) {
        if (i > 0) out += ", ";
        out += relation_name(g, hints[i].tuple.relation);
        out += ": ";
        out += entity_name(g, hints[i].tuple.tail);
    }
    return out;
}

std::string render_history_prompt(const std::vector<int32_t>& padded_history,
                                  const KnowledgeGraph& g) {
    std::string out;
    bool first = true;
    for (int32_t v : padded_history) {
        if (v == kPadItem) continue;
        if (!first) out += ", ";
        out += quote_title(g.item_title(v));
        first = false;
    }
    return out;
}

std::string render_item_hint_prompt(int32_t item, const std::vector<ItemHint>& hints,
                                    const KnowledgeGraph& g) {
    std::string out = "(Title: ";
    out += quote_title(g.item_title(item));
    out += ", Attributes: {";
    for (size_t i = 0; i < hints.size(); ++i) {
        if (i > 0) out += ", ";
        out += relation_name(g, hints[i].tuple.relation);
        out += ": ";
        out += entity_name(g, hints[i].tuple.tail);
    }
    out += "})";
    return out;
}

std::string render_naive_triples(const std::vector<ItemHint>& hints, const std::string& head_name,
                                 const KnowledgeGraph& g) {
    std::string out;
    for (size_t i = 0; i < hints.size(); ++i) {
        if (i > 0) out += ", ";
        out += "(";
        out += head_name;
        out += ", ";
        out += relation_name(g, hints[i].tuple.relation);
        out += ", ";
        out += entity_name(g, hints[i].tuple.tail);
        out += ")";
    }
    return out;
}

PromptBundle assemble_prompt(const std::string& p_system, const std::string& p_history,
                             const std::string& p_user_hint,
                             const std::vector<std::string>& p_items,
                             const std::vector<std::string>& candidate_titles,
                             const std::string& gold_title) {
    if (p_items.size() != candidate_titles.size())
        throw ShapeError("assemble_prompt: candidate/segment count mismatch");
    bool gold_found = false;
    for (const auto& t : candidate_titles)
        if (t == gold_title) gold_found = true;
    if (!gold_found)
        throw IntegrityError("gold title '" + gold_title + "' not among candidates");

    PromptBundle b;
    b.p_system = p_system;
    b.p_history = p_history;
    b.p_user_hint = p_user_hint;
    b.p_items = p_items;
    b.response = gold_title;

    std::string x = p_system;
    x += "\n\nInteraction history: ";
    x += p_history;
    if (!p_user_hint.empty()) {
        x += "\n\nUser preferences: ";
        x += p_user_hint;
    }
    x += "\n\nCandidates:";
    for (const auto& pv : p_items) {
        x += "\n";
        x += pv;
    }
    x += "\n\nWhich candidate do you recommend?";
    b.instruction = std::move(x);

    b.system_stats = segment_stats(b.p_system);
    b.history_stats = segment_stats(b.p_history);
    b.user_hint_stats = segment_stats(b.p_user_hint);
    for (const auto& pv : b.p_items) b.item_stats.push_back(segment_stats(pv));
    return b;
}

PromptBundle build_bundle(const KnowledgeGraph& g, const Instance& inst, const HintSet& hints) {
    std::string p_b = render_history_prompt(truncate_and_pad_history(inst.history), g);
    std::string p_c = render_user_hint_prompt(hints.user_hints, g);
    std::vector<std::string> p_items;
    std::vector<std::string> titles;
    for (int32_t c : inst.candidates) {
        auto it = hints.item_hints.find(c);
        static const std::vector<ItemHint> kNone;
        p_items.push_back(render_item_hint_prompt(c, it == hints.item_hints.end() ? kNone : it->second, g));
        titles.push_back(g.item_title(c));
    }
    return assemble_prompt(kSystemPromptTemplate, p_b, p_c, p_items, titles,
                           g.item_title(inst.gt_item()));
}

std::string DatasetManifest::to_text() const {
    std::ostringstream os;
    os << "records\t" << records << "\n"
       << "mean_instruction_chars\t" << mean_instruction_chars << "\n"
       << "mean_response_chars\t" << mean_response_chars << "\n"
       << "mean_history_chars\t" << mean_history_chars << "\n"
       << "mean_user_hint_chars\t" << mean_user_hint_chars << "\n"
       << "mean_item_chars\t" << mean_item_chars << "\n";
    return os.str();
}

DatasetManifest export_instruction_dataset(const std::vector<PromptBundle>& bundles,
                                           const std::string& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);

    DatasetManifest man;
    man.records = bundles.size();
    double instr = 0, resp = 0, hist = 0, uh = 0, item = 0;
    size_t item_segments = 0;
    for (const auto& b : bundles) {
        nlohmann::ordered_json j;
        j["instruction"] = b.instruction;
        j["response"] = b.response;
        os << j.dump() << "\n";
        instr += static_cast<double>(b.instruction.size());
        resp += static_cast<double>(b.response.size());
        hist += static_cast<double>(b.history_stats.chars);
        uh += static_cast<double>(b.user_hint_stats.chars);
        for (const auto& st : b.item_stats) {
            item += static_cast<double>(st.chars);
            ++item_segments;
        }
    }
    if (!os) throw std::runtime_error("write failure: " + path);
    if (!bundles.empty()) {
        man.mean_instruction_chars = instr / static_cast<double>(bundles.size());
        man.mean_response_chars = resp / static_cast<double>(bundles.size());
        man.mean_history_chars = hist / static_cast<double>(bundles.size());
        man.mean_user_hint_chars = uh / static_cast<double>(bundles.size());
        if (item_segments > 0) man.mean_item_chars = item / static_cast<double>(item_segments);
    }
    return man;
}

std::pair<std::string, std::string> parse_dataset_record(const std::string& line) {
    auto j = nlohmann::json::parse(line);
    return {j.at("instruction").get<std::string>(), j.at("response").get<std::string>()};
}

}  // namespace pidlr
