#include "quandary/scoring/pool.hpp"

#include <unordered_set>

#include "quandary/common/hash.hpp"
#include "quandary/corpus/stats.hpp"

namespace quandary {

const char* const kDefaultElicitationTemplate =
    "State one ethical principle, as a single sentence, that applies to the situation.\n"
    "\n"
    "Situation: I found a wallet with cash in it on the bus and nobody saw me pick it up.\n"
    "Rule of thumb: It is right to return lost property to its owner.\n"
    "\n"
    "Situation: My friend asked me to tell her parents she was at my house when she was not.\n"
    "Rule of thumb: You should not deceive people on behalf of someone else.\n"
    "\n"
    "Situation: {context} {question}\n"
    "Rule of thumb:";

namespace {

std::string strip_tags(std::string text)
{
    for (const char* tag : {"<p>", "</p>"}) {
        for (auto pos = text.find(tag); pos != std::string::npos; pos = text.find(tag)) {
            text.replace(pos, std::string_view(tag).size(), " ");
        }
    }
    return text;
}

std::string join_context(const Quandary& q)
{
    std::string out;
    for (const auto& paragraph : q.context) {
        if (!out.empty()) {
            out += ' ';
        }
        out += paragraph;
    }
    return out;
}

}  // namespace

std::vector<Principle> generate_principles(const Quandary& quandary, CompletionClient& client, std::size_t count,
                                           std::uint64_t seed, const std::string& elicitation_template)
{
    const SlotTemplate tmpl(elicitation_template);
    const std::string prompt = tmpl.render({{"context", join_context(quandary)}, {"question", quandary.question}});

    std::vector<Principle> out;
    std::unordered_set<std::string> texts;
    for (std::size_t i = 0; i < count; ++i) {
        CompletionRequest request;
        request.prompt = prompt;
        request.max_tokens = 64;
        request.stop_sequences = {"\n\n", "Situation:"};
        request.seed = seed + i;
        const auto response = client.complete(request);
        const auto sentences = split_sentences(strip_tags(response.text));
        if (sentences.empty()) {
            continue;
        }
        const std::string& text = sentences.front();
        if (!texts.insert(text).second) {
            continue;
        }
        out.push_back({"gen-" + to_hex(fnv1a64(quandary.id + '\x1f' + text), 12), text, Provenance::generated});
    }
    return out;
}

std::vector<Principle> build_pool(const Quandary& quandary, const PoolSources& sources)
{
    std::vector<Principle> pool;
    std::unordered_set<std::string> ids;
    auto add = [&](Principle p, Provenance provenance) {
        p.provenance = provenance;
        if (ids.insert(p.id).second) {
            pool.push_back(std::move(p));
        }
    };
    if (sources.index != nullptr && sources.top_k > 0) {
        for (auto& s : retrieve_top_k(*sources.index, quandary, sources.top_k)) {
            add(std::move(s.principle), Provenance::retrieved);
        }
    }
    if (sources.generator != nullptr && sources.generated_count > 0) {
        for (auto& p : generate_principles(quandary, *sources.generator, sources.generated_count, sources.seed,
                                           sources.elicitation_template)) {
            add(std::move(p), Provenance::generated);
        }
    }
    for (const auto& p : sources.handcrafted) {
        add(p, Provenance::handcrafted);
    }
    return pool;
}

}  // namespace quandary
