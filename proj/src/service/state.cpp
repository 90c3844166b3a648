#include "quandary/service/state.hpp"

#include <regex>

#include "quandary/common/hash.hpp"
#include "quandary/common/log.hpp"

namespace quandary {

std::string_view to_string(SessionKind k) noexcept
{
    return k == SessionKind::annotation ? "annotation" : "principle_review";
}

namespace {

SessionKind session_kind_from_string(const std::string& s)
{
    if (s == "annotation") {
        return SessionKind::annotation;
    }
    if (s == "principle_review") {
        return SessionKind::principle_review;
    }
    fail(ErrorCode::invalid_argument, "session kind must be 'annotation' or 'principle_review'");
}

int status_for(ErrorCode code)
{
    switch (code) {
    case ErrorCode::parse:
    case ErrorCode::schema:
        return 400;
    case ErrorCode::auth:
        return 401;
    case ErrorCode::not_found:
        return 404;
    case ErrorCode::conflict:
    case ErrorCode::precondition:
        return 409;
    case ErrorCode::expired:
        return 410;
    case ErrorCode::invalid_argument:
    case ErrorCode::empty_input:
    case ErrorCode::no_candidates:
        return 422;
    case ErrorCode::backend:
    case ErrorCode::network:
    case ErrorCode::rate_limited:
        return 502;
    case ErrorCode::scorer:
        return 503;
    case ErrorCode::io:
        return 500;
    }
    return 500;
}

Json error_body(ErrorCode code, const std::string& message)
{
    Json e{{"code", to_string(code)}, {"message", message}};
    static const std::regex field_re("field '([A-Za-z_0-9.]+)'");
    std::smatch m;
    if (std::regex_search(message, m, field_re)) {
        e["field"] = m[1].str();
    }
    return Json{{"error", e}};
}

ApiResponse error_response(ErrorCode code, const std::string& message)
{
    return {status_for(code), error_body(code, message)};
}

std::vector<std::string> split_path(const std::string& path)
{
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (start <= path.size()) {
        auto end = path.find('/', start);
        if (end == std::string::npos) {
            end = path.size();
        }
        if (end > start) {
            parts.push_back(path.substr(start, end - start));
        }
        start = end + 1;
    }
    return parts;
}

Json parse_body(const std::string& body)
{
    if (body.empty()) {
        return Json::object();
    }
    try {
        Json j = Json::parse(body);
        require(j.is_object(), ErrorCode::schema, "request body must be a JSON object");
        return j;
    } catch (const Json::parse_error& e) {
        fail(ErrorCode::parse, std::string("request body is not valid JSON: ") + e.what());
    }
}

std::size_t parse_count(const std::string& text, const std::string& name)
{
    try {
        std::size_t used = 0;
        const long long v = std::stoll(text, &used);
        require(used == text.size() && v >= 1, ErrorCode::invalid_argument, name + " must be a positive integer");
        return static_cast<std::size_t>(v);
    } catch (const std::logic_error&) {
        fail(ErrorCode::invalid_argument, name + " must be a positive integer");
    }
}

Json questions_json()
{
    Json q = Json::array();
    for (auto c : kCriteria) {
        q.push_back({{"criterion", to_string(c)}, {"question", criterion_question(c)}});
    }
    return q;
}

Json quandary_view(const Quandary& q)
{
    return Json{{"id", q.id}, {"context", q.context}, {"question", q.question}};
}

}  // namespace

struct Service::Impl {
    struct CandidateEntry {
        RankedPool pool;
        std::optional<PendingSelection> pending;
        bool lexical_fallback = false;
    };

    struct FinalizedSelection {
        std::string token;
        std::string fingerprint;
        PrincipleSelection selection;
    };

    Impl(const ServiceConfig& config, std::shared_ptr<HttpTransport> transport,
         std::function<Clock::time_point()> clock)
        : config(config), clock(std::move(clock)), resources(PipelineResources::load(config.resources)),
          scorer(make_scorer(config.scorer, transport)), fallback_scorer(make_scorer(lexical_scorer_config()))
    {
        for (const auto& [name, backend] : config.backends) {
            clients[name] = make_client(backend, transport);
        }
        std::filesystem::create_directories(config.state_dir);
        quandary_journal = std::make_unique<Journal>(config.state_dir / "quandaries.jsonl");
        reference_journal = std::make_unique<Journal>(config.state_dir / "references.jsonl");
        selection_journal = std::make_unique<Journal>(config.state_dir / "selections.jsonl");
        answer_journal = std::make_unique<Journal>(config.state_dir / "answers.jsonl");
        session_journal = std::make_unique<Journal>(config.state_dir / "sessions.jsonl");
        blinding_journal = std::make_unique<Journal>(config.state_dir / "blinding.jsonl");
        annotation_journal = std::make_unique<Journal>(config.state_dir / "annotations.jsonl");
        replay();
    }

    const ServiceConfig& config;
    std::function<Clock::time_point()> clock;
    PipelineResources resources;
    std::unique_ptr<Scorer> scorer;
    std::unique_ptr<Scorer> fallback_scorer;
    std::map<std::string, std::shared_ptr<CompletionClient>> clients;

    mutable std::mutex mutex;
    QuandaryStore quandaries;
    AnswerStore references;
    std::map<std::string, CandidateEntry> candidate_cache;
    std::map<std::string, PendingSelection> pending_by_token;
    std::map<std::string, FinalizedSelection> selections;
    std::vector<Json> answers;
    std::map<std::string, std::size_t> latest_answer;
    std::map<std::string, SessionState> sessions;
    std::vector<std::string> session_order;
    BlindingMap blinding;
    std::vector<std::pair<std::string, AnnotationRecord>> annotations;
    std::size_t appends_since_compaction = 0;

    std::unique_ptr<Journal> quandary_journal;
    std::unique_ptr<Journal> reference_journal;
    std::unique_ptr<Journal> selection_journal;
    std::unique_ptr<Journal> answer_journal;
    std::unique_ptr<Journal> session_journal;
    std::unique_ptr<Journal> blinding_journal;
    std::unique_ptr<Journal> annotation_journal;

    void replay()
    {
        for (const auto& j : quandary_journal->replay()) {
            quandaries.insert(parse_quandary(j));
        }
        for (const auto& j : reference_journal->replay()) {
            references.insert(parse_answer(j));
        }
        for (const auto& j : selection_journal->replay()) {
            selections[j.at("quandary_id").get<std::string>()] = {
                j.at("token").get<std::string>(), j.at("fingerprint").get<std::string>(),
                parse_selection(j.at("selection"))};
        }
        for (const auto& j : answer_journal->replay()) {
            record_answer(j);
        }
        for (const auto& j : blinding_journal->replay()) {
            auto b = parse_blinded_pair(j);
            blinding[b.pair_id] = b;
        }
        for (const auto& j : session_journal->replay()) {
            SessionState s;
            s.session_id = j.at("session_id").get<std::string>();
            s.kind = session_kind_from_string(j.at("kind").get<std::string>());
            s.annotator = j.value("annotator", std::string{});
            for (const auto& item : j.at("items")) {
                s.queue.push_back({item.at("pair_id").get<std::string>(), item.at("quandary_id").get<std::string>(),
                                   item.value("text_a", std::string{}), item.value("text_b", std::string{})});
            }
            session_order.push_back(s.session_id);
            sessions[s.session_id] = std::move(s);
        }
        for (const auto& j : annotation_journal->replay()) {
            const auto session_id = j.at("session_id").get<std::string>();
            auto record = parse_annotation(j.at("record"));
            if (auto it = sessions.find(session_id); it != sessions.end()) {
                apply_vote(it->second, record);
            }
            annotations.emplace_back(session_id, std::move(record));
        }
    }

    void record_answer(const Json& entry)
    {
        const auto qid = entry.at("answer").at("quandary_id").get<std::string>();
        answers.push_back(entry);
        if (entry.at("answer").value("complete", false)) {
            latest_answer[qid] = answers.size() - 1;
        }
    }

    static void apply_vote(SessionState& s, const AnnotationRecord& r)
    {
        auto& voted = s.votes[r.pair_id];
        voted.push_back(r.criterion);
        if (voted.size() == kCriteria.size()) {
            ++s.completed;
        }
    }

    void append(Journal& journal, const Json& record)
    {
        journal.append(record);
        if (++appends_since_compaction >= config.compact_every) {
            compact_locked();
        }
    }

    std::vector<Json> selection_records() const
    {
        std::vector<Json> out;
        for (const auto& [qid, s] : selections) {
            out.push_back({{"quandary_id", qid},
                           {"token", s.token},
                           {"fingerprint", s.fingerprint},
                           {"selection", to_json(s.selection)}});
        }
        return out;
    }

    Json session_record(const SessionState& s) const
    {
        Json items = Json::array();
        for (const auto& item : s.queue) {
            items.push_back({{"pair_id", item.pair_id},
                             {"quandary_id", item.quandary_id},
                             {"text_a", item.text_a},
                             {"text_b", item.text_b}});
        }
        return Json{{"session_id", s.session_id},
                    {"kind", to_string(s.kind)},
                    {"annotator", s.annotator},
                    {"items", items}};
    }

    void compact_locked()
    {
        std::vector<Json> records;
        for (const auto& q : quandaries.all()) {
            records.push_back(to_json(q));
        }
        quandary_journal->compact(records);
        records.clear();
        for (const auto& a : references.all()) {
            records.push_back(to_json(a));
        }
        reference_journal->compact(records);
        selection_journal->compact(selection_records());
        answer_journal->compact(answers);
        records.clear();
        for (const auto& id : session_order) {
            records.push_back(session_record(sessions.at(id)));
        }
        session_journal->compact(records);
        records.clear();
        for (const auto& [id, b] : blinding) {
            records.push_back(to_json(b));
        }
        blinding_journal->compact(records);
        records.clear();
        for (const auto& [sid, r] : annotations) {
            records.push_back({{"session_id", sid}, {"record", to_json(r)}});
        }
        annotation_journal->compact(records);
        appends_since_compaction = 0;
    }

    // POST /quandaries
    ApiResponse create_quandary(const Json& body)
    {
        const Quandary q = parse_quandary(body);
        std::optional<ReferenceAnswer> reference;
        if (body.contains("answer")) {
            const auto& a = body["answer"];
            require(a.is_object(), ErrorCode::schema, "field 'answer' must be an object");
            reference = parse_answer(Json{{"quandary_id", q.id},
                                          {"text", a.value("text", std::string{})},
                                          {"author", a.value("author", std::string("reference"))}});
        }
        std::lock_guard lock(mutex);
        if (quandaries.contains(q.id)) {
            return error_response(ErrorCode::conflict, "quandary '" + q.id + "' already exists");
        }
        append(*quandary_journal, to_json(q));
        quandaries.insert(q);
        if (reference) {
            append(*reference_journal, to_json(*reference));
            references.insert(*reference);
        }
        return {201, Json{{"id", q.id}}};
    }

    Quandary require_quandary(const std::string& id) const
    {
        std::lock_guard lock(mutex);
        auto q = quandaries.find(id);
        require(q.has_value(), ErrorCode::not_found, "no quandary '" + id + "'");
        return *q;
    }

    Scorer& pick_scorer(const std::string& name)
    {
        if (name.empty() || name == config.scorer.scorer_id || name == "remote" ||
            (name == "lexical" && config.scorer.kind == ScorerKind::lexical)) {
            return *scorer;
        }
        require(name == "lexical", ErrorCode::invalid_argument, "unknown scorer '" + name + "'");
        return *fallback_scorer;
    }

    static bool scorer_unavailable(const RankedPool& pool)
    {
        return pool.considered.empty() && !pool.dropped.empty();
    }

    Json pending_json(const CandidateEntry& entry) const
    {
        Json j = candidates_payload(entry.pending->quandary_id(), entry.pool);
        j["token"] = entry.pending->token();
        j["expires_at"] = std::chrono::duration_cast<std::chrono::seconds>(
                              entry.pending->expires_at().time_since_epoch())
                              .count();
        j["lexical_fallback"] = entry.lexical_fallback;
        j["finalized"] = entry.pending->finalized().has_value();
        return j;
    }

    // GET /quandaries/{id}/candidates
    ApiResponse candidates(const std::string& id, const std::map<std::string, std::string>& query)
    {
        const Quandary q = require_quandary(id);
        CandidateOptions options = config.candidates;
        if (auto it = query.find("top_k"); it != query.end()) {
            options.top_k = parse_count(it->second, "top_k");
        }
        const auto scorer_name = query.contains("scorer") ? query.at("scorer") : std::string{};
        Scorer& chosen = pick_scorer(scorer_name);
        const std::string key = id + '\x1f' + std::to_string(options.top_k) + '\x1f' + chosen.config().scorer_id;

        const auto now = clock();
        {
            std::lock_guard lock(mutex);
            if (auto it = candidate_cache.find(key); it != candidate_cache.end()) {
                if (now < it->second.pending->expires_at() || it->second.pending->finalized()) {
                    return {200, pending_json(it->second)};
                }
            }
        }

        CompletionClient* generator = nullptr;
        if (!config.principle_backend.empty()) {
            generator = clients.at(config.principle_backend).get();
        }
        CandidateEntry entry;
        entry.pool = candidate_pool(q, resources, chosen, generator, options);
        if (scorer_unavailable(entry.pool) && chosen.config().kind == ScorerKind::remote_relevance) {
            RankedPool fallback = candidate_pool(q, resources, *fallback_scorer, generator, options);
            Json body = error_body(ErrorCode::scorer, "relevance scorer unavailable: " +
                                                          entry.pool.dropped.front().reason);
            body["lexical_fallback"] = true;
            body["fallback"] = candidates_payload(id, fallback);
            return {503, body};
        }
        entry.pending.emplace(make_pending_token(id, chosen.config(), options.top_k), id, entry.pool, now,
                              config.pending_ttl);

        std::lock_guard lock(mutex);
        auto& slot = candidate_cache[key];
        if (!slot.pending || (now >= slot.pending->expires_at() && !slot.pending->finalized())) {
            slot = std::move(entry);
            pending_by_token.insert_or_assign(slot.pending->token(), *slot.pending);
        }
        return {200, pending_json(slot)};
    }

    // POST /quandaries/{id}/selection
    ApiResponse select(const std::string& id, const Json& body)
    {
        const Quandary q = require_quandary(id);
        require(body.contains("token") && body["token"].is_string(), ErrorCode::schema, "missing field 'token'");
        const auto token = body["token"].get<std::string>();
        const auto mode = body.value("mode", std::string("human"));
        require(mode == "human" || mode == "automatic", ErrorCode::schema, "field 'mode' must be human or automatic");
        const auto annotator = body.value("annotator", std::string{});

        std::vector<PrincipleChoice> choices;
        if (body.contains("choices")) {
            require(body["choices"].is_array(), ErrorCode::schema, "field 'choices' must be an array");
            for (const auto& c : body["choices"]) {
                if (c.is_string()) {
                    choices.push_back({c.get<std::string>(), std::nullopt});
                } else {
                    require(c.is_object(), ErrorCode::schema, "field 'choices' holds ids or objects");
                    PrincipleChoice choice{c.value("id", std::string{}), std::nullopt};
                    if (c.contains("text")) {
                        choice.text = c["text"].get<std::string>();
                    }
                    choices.push_back(std::move(choice));
                }
            }
        }
        const std::string fingerprint =
            Json{{"mode", mode}, {"annotator", annotator}, {"choices", body.value("choices", Json::array())}}.dump();

        std::lock_guard lock(mutex);
        if (auto it = selections.find(id); it != selections.end() && it->second.token == token) {
            if (it->second.fingerprint == fingerprint) {
                return {200, to_json(it->second.selection)};
            }
            return error_response(ErrorCode::conflict, "selection for '" + id + "' is already finalized");
        }
        auto pit = pending_by_token.find(token);
        require(pit != pending_by_token.end() && pit->second.quandary_id() == id, ErrorCode::not_found,
                "unknown pending token '" + token + "' for '" + id + "'; fetch candidates again");
        const PendingSelection& pending = pit->second;

        PrincipleSelection selection;
        if (mode == "automatic") {
            require(clock() < pending.expires_at(), ErrorCode::expired, "pending selection '" + token + "' has expired");
            selection = automatic_selection(q, pending.pool(), config.candidates.selection.max_principles);
            require(pending.try_finalize(selection), ErrorCode::conflict,
                    "selection for '" + id + "' is already finalized");
        } else {
            selection = confirm_selection(pending, choices, annotator, clock(),
                                          config.candidates.selection.jaccard_cutoff);
        }
        FinalizedSelection finalized{token, fingerprint, selection};
        append(*selection_journal, {{"quandary_id", id},
                                    {"token", token},
                                    {"fingerprint", fingerprint},
                                    {"selection", to_json(selection)}});
        selections[id] = std::move(finalized);
        return {200, to_json(selection)};
    }

    // POST /quandaries/{id}/answer
    ApiResponse answer(const std::string& id, const Json& body)
    {
        const Quandary q = require_quandary(id);
        const auto backend = body.value("backend", std::string("mock"));
        GenerationOptions options = config.generation;
        options.seed = body.value("seed", options.seed);
        options.max_tokens = body.value("max_tokens", options.max_tokens);
        options.temperature = body.value("temperature", options.temperature);

        PrincipleSelection selection;
        {
            std::lock_guard lock(mutex);
            auto it = selections.find(id);
            if (it == selections.end()) {
                return error_response(ErrorCode::precondition, "no finalized selection for '" + id + "'");
            }
            selection = it->second.selection;
        }
        auto cit = clients.find(backend);
        require(cit != clients.end(), ErrorCode::invalid_argument, "unknown backend '" + backend + "'");

        GeneratedAnswer generated;
        std::optional<GenerationError> failure;
        try {
            generated = generate_answer(q, selection, *cit->second, resources.templates, resources.exemplars, options);
        } catch (const GenerationError& e) {
            failure.emplace(e);
            generated = e.partial();
        }

        std::lock_guard lock(mutex);
        const std::string answer_id = "ans-" + to_hex(answers.size() + 1, 6);
        Json entry{{"answer_id", answer_id}, {"backend", backend}, {"seed", options.seed},
                   {"answer", to_json(generated)}};
        append(*answer_journal, entry);
        record_answer(entry);
        if (failure) {
            Json err = error_body(failure->code(), failure->what());
            err["answer_id"] = answer_id;
            err["partial"] = to_json(generated);
            return {502, err};
        }
        return {200, Json{{"answer_id", answer_id},
                          {"quandary_id", id},
                          {"wrapped", generated.disclaimer_wrapped},
                          {"answer", to_json(generated)}}};
    }

    // POST /sessions
    ApiResponse create_session(const Json& body)
    {
        const auto kind = session_kind_from_string(body.value("kind", std::string("annotation")));
        const auto annotator = body.value("annotator", std::string{});
        require(!annotator.empty(), ErrorCode::schema, "missing field 'annotator'");

        std::lock_guard lock(mutex);
        SessionState s;
        s.kind = kind;
        s.annotator = annotator;
        s.session_id = "sess-" + to_hex(hash_with_seed("session/" + std::to_string(session_order.size()) + "/" +
                                                           annotator,
                                                       config.blinding_seed),
                                        12);
        while (sessions.contains(s.session_id)) {
            s.session_id += "x";
        }

        std::vector<std::string> ids;
        if (body.contains("quandary_ids")) {
            ids = body["quandary_ids"].get<std::vector<std::string>>();
        }

        std::vector<BlindedPair> new_pairs;
        auto add_pair = [&](const std::string& qid, const std::string& system_text, const std::string& reference_text) {
            const std::string pair_id =
                "pair-" + to_hex(hash_with_seed(s.session_id + "/" + std::to_string(s.queue.size()),
                                                config.blinding_seed),
                                 12);
            auto b = assign_blinding(pair_id, qid, config.system_id, config.reference_id, config.blinding_seed);
            const bool system_is_a = b.label_a == config.system_id;
            s.queue.push_back({pair_id, qid, system_is_a ? system_text : reference_text,
                               system_is_a ? reference_text : system_text});
            new_pairs.push_back(std::move(b));
        };

        if (kind == SessionKind::principle_review) {
            if (ids.empty()) {
                for (const auto& q : quandaries.all()) {
                    ids.push_back(q.id);
                }
            }
            for (const auto& qid : ids) {
                require(quandaries.contains(qid), ErrorCode::not_found, "no quandary '" + qid + "'");
                s.queue.push_back({"review-" + qid, qid, "", ""});
            }
        } else if (body.contains("items")) {
            for (const auto& item : body["items"]) {
                const auto qid = item.at("quandary_id").get<std::string>();
                require(quandaries.contains(qid), ErrorCode::not_found, "no quandary '" + qid + "'");
                add_pair(qid, item.at("system_text").get<std::string>(), item.at("reference_text").get<std::string>());
            }
        } else {
            if (ids.empty()) {
                for (const auto& q : quandaries.all()) {
                    if (latest_answer.contains(q.id) && references.contains(q.id)) {
                        ids.push_back(q.id);
                    }
                }
            }
            for (const auto& qid : ids) {
                auto a = latest_answer.find(qid);
                auto ref = references.find(qid);
                require(a != latest_answer.end() && ref.has_value(), ErrorCode::precondition,
                        "quandary '" + qid + "' needs a generated answer and a reference answer");
                add_pair(qid, answers[a->second].at("answer").at("concatenated").get<std::string>(), ref->text);
            }
        }
        require(!s.queue.empty(), ErrorCode::empty_input, "session would have an empty queue");

        for (const auto& b : new_pairs) {
            append(*blinding_journal, to_json(b));
            blinding[b.pair_id] = b;
        }
        append(*session_journal, session_record(s));
        const Json payload{{"session_id", s.session_id},
                           {"kind", to_string(s.kind)},
                           {"total", s.queue.size()},
                           {"completed", 0}};
        session_order.push_back(s.session_id);
        sessions[s.session_id] = std::move(s);
        return {201, payload};
    }

    SessionState& require_session(const std::string& id)
    {
        auto it = sessions.find(id);
        require(it != sessions.end(), ErrorCode::not_found, "no session '" + id + "'");
        return it->second;
    }

    std::size_t review_completed(const SessionState& s) const
    {
        std::size_t n = 0;
        for (const auto& item : s.queue) {
            n += selections.contains(item.quandary_id) ? 1 : 0;
        }
        return n;
    }

    // GET /sessions/{id}/next
    ApiResponse next(const std::string& id)
    {
        std::lock_guard lock(mutex);
        const SessionState& s = require_session(id);
        Json payload{{"session_id", s.session_id}, {"kind", to_string(s.kind)}};
        if (s.kind == SessionKind::principle_review) {
            payload["progress"] = {{"completed", review_completed(s)}, {"total", s.queue.size()}};
            for (const auto& item : s.queue) {
                if (!selections.contains(item.quandary_id)) {
                    payload["done"] = false;
                    payload["quandary"] = quandary_view(*quandaries.find(item.quandary_id));
                    payload["candidates_path"] = "/quandaries/" + item.quandary_id + "/candidates";
                    return {200, payload};
                }
            }
            payload["done"] = true;
            return {200, payload};
        }
        payload["progress"] = {{"completed", s.completed}, {"total", s.queue.size()}};
        if (s.completed >= s.queue.size()) {
            payload["done"] = true;
            return {200, payload};
        }
        const SessionItem& item = s.queue[s.completed];
        Json pending = Json::array();
        const auto vit = s.votes.find(item.pair_id);
        for (auto c : kCriteria) {
            if (vit == s.votes.end() ||
                std::find(vit->second.begin(), vit->second.end(), c) == vit->second.end()) {
                pending.push_back(to_string(c));
            }
        }
        payload["done"] = false;
        payload["pair_id"] = item.pair_id;
        payload["quandary"] = quandary_view(*quandaries.find(item.quandary_id));
        payload["answers"] = {{"A", item.text_a}, {"B", item.text_b}};
        payload["questions"] = questions_json();
        payload["choices"] = {"A", "B", "Both", "None"};
        payload["pending_criteria"] = pending;
        return {200, payload};
    }

    // POST /sessions/{id}/votes
    ApiResponse vote(const std::string& id, const Json& body)
    {
        require(body.contains("pair_id") && body["pair_id"].is_string(), ErrorCode::schema, "missing field 'pair_id'");
        require(body.contains("votes") && body["votes"].is_object() && !body["votes"].empty(), ErrorCode::schema,
                "missing field 'votes'");
        const auto pair_id = body["pair_id"].get<std::string>();

        std::lock_guard lock(mutex);
        SessionState& s = require_session(id);
        require(s.kind == SessionKind::annotation, ErrorCode::conflict, "session '" + id + "' takes no votes");
        require(s.completed < s.queue.size() && s.queue[s.completed].pair_id == pair_id, ErrorCode::conflict,
                "pair '" + pair_id + "' is not the pair currently served");

        std::vector<AnnotationRecord> records;
        const auto& already = s.votes[pair_id];
        for (const auto& [criterion, choice] : body["votes"].items()) {
            AnnotationRecord r;
            r.pair_id = pair_id;
            r.annotator = s.annotator;
            try {
                r.criterion = criterion_from_string(criterion);
                require(choice.is_string(), ErrorCode::schema, "choice must be a string");
                r.choice = choice_from_string(choice.get<std::string>());
            } catch (const Error& e) {
                return error_response(ErrorCode::invalid_argument, e.what());
            }
            require(std::find(already.begin(), already.end(), r.criterion) == already.end(), ErrorCode::conflict,
                    "criterion " + criterion + " already voted for pair '" + pair_id + "'");
            records.push_back(r);
        }
        for (const auto& r : records) {
            append(*annotation_journal, {{"session_id", id}, {"record", to_json(r)}});
            apply_vote(s, r);
            annotations.emplace_back(id, r);
        }
        return {200, Json{{"accepted", records.size()},
                          {"progress", {{"completed", s.completed}, {"total", s.queue.size()}}},
                          {"done", s.completed >= s.queue.size()}}};
    }
};

Service::Service(ServiceConfig config, std::shared_ptr<HttpTransport> transport,
                 std::function<Clock::time_point()> clock)
    : config_(std::move(config))
{
    impl_ = std::make_unique<Impl>(config_, std::move(transport), std::move(clock));
}

Service::~Service() = default;

void Service::compact()
{
    std::lock_guard lock(impl_->mutex);
    impl_->compact_locked();
}

std::vector<AnnotationRecord> Service::annotations() const
{
    std::lock_guard lock(impl_->mutex);
    std::vector<AnnotationRecord> out;
    for (const auto& [sid, r] : impl_->annotations) {
        out.push_back(r);
    }
    return out;
}

BlindingMap Service::blinding() const
{
    std::lock_guard lock(impl_->mutex);
    return impl_->blinding;
}

ApiResponse Service::handle(const ApiRequest& request)
{
    try {
        if (const auto token = env_or_empty(config_.bearer_token_env); !token.empty()) {
            auto it = request.headers.find("authorization");
            if (it == request.headers.end() || it->second != "Bearer " + token) {
                return error_response(ErrorCode::auth, "missing or invalid bearer token");
            }
        }
        const auto parts = split_path(request.path);
        const bool get = request.method == "GET";
        const bool post = request.method == "POST";
        auto method_not_allowed = [] { return ApiResponse{405, error_body(ErrorCode::invalid_argument, "method not allowed")}; };

        if (parts.size() == 1 && parts[0] == "quandaries") {
            return post ? impl_->create_quandary(parse_body(request.body)) : method_not_allowed();
        }
        if (parts.size() == 3 && parts[0] == "quandaries") {
            if (parts[2] == "candidates") {
                return get ? impl_->candidates(parts[1], request.query) : method_not_allowed();
            }
            if (parts[2] == "selection") {
                return post ? impl_->select(parts[1], parse_body(request.body)) : method_not_allowed();
            }
            if (parts[2] == "answer") {
                return post ? impl_->answer(parts[1], parse_body(request.body)) : method_not_allowed();
            }
        }
        if (parts.size() == 1 && parts[0] == "sessions") {
            return post ? impl_->create_session(parse_body(request.body)) : method_not_allowed();
        }
        if (parts.size() == 3 && parts[0] == "sessions") {
            if (parts[2] == "next") {
                return get ? impl_->next(parts[1]) : method_not_allowed();
            }
            if (parts[2] == "votes") {
                return post ? impl_->vote(parts[1], parse_body(request.body)) : method_not_allowed();
            }
        }
        return error_response(ErrorCode::not_found, "no route for " + request.method + " " + request.path);
    } catch (const Error& e) {
        return error_response(e.code(), e.what());
    } catch (const Json::exception& e) {
        return error_response(ErrorCode::schema, e.what());
    } catch (const std::exception& e) {
        log(LogLevel::error, std::string("unhandled: ") + e.what());
        return {500, error_body(ErrorCode::io, e.what())};
    }
}

}  // namespace quandary
