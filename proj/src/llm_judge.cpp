#include "gecforge/llm_judge.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include "httplib.h"

#include "gecforge/parallel.hpp"
#include "gecforge/random.hpp"
#include "gecforge/tokens.hpp"

namespace gecforge::judge {

using aligner::ErrorCategory;

// ---------------------------------------------------------------- eval set

std::pair<EvalSet, EvalSetReport> build_eval_set(const std::vector<FinalLabel>& labels,
                                                 const model_bridge::CandidateSet& candidates,
                                                 std::size_t n_per_type, std::uint64_t seed,
                                                 const std::string& language) {
  std::map<std::string, const model_bridge::Candidate*> by_id;
  for (const auto& c : candidates.pairs) by_id.emplace(c.id, &c);

  std::map<ErrorCategory, std::vector<const FinalLabel*>> members;
  for (auto cat : aligner::kPureCategories) members[cat];
  for (const auto& l : labels)
    if (aligner::is_pure(l.category) && l.judgments > 0) members[l.category].push_back(&l);

  EvalSet set;
  set.language = language;
  EvalSetReport report;
  for (auto& [cat, group] : members) {
    std::sort(group.begin(), group.end(),
              [](const FinalLabel* a, const FinalLabel* b) { return a->item_id < b->item_id; });
    const std::size_t take = std::min(n_per_type, group.size());
    report.shortfall[cat] = n_per_type - take;
    Rng rng(derive_seed(seed, "eval/" + aligner::to_string(cat)));
    auto order = shuffled_indices(group.size(), rng);
    for (std::size_t k = 0; k < take; ++k) {
      const FinalLabel& l = *group[order[k]];
      ++report.sampled;
      if (!l.subtask1 || !l.subtask2 || *l.subtask1 == CorrectionLabel::Undetermined ||
          *l.subtask2 == ResidualLabel::Undetermined) {
        ++report.excluded_undetermined;
        continue;
      }
      auto it = by_id.find(l.item_id);
      if (it == by_id.end()) throw LoadError("labeled item '" + l.item_id + "' has no candidate");
      EvalItem item;
      item.id = l.item_id;
      item.category = cat;
      item.source = it->second->source;
      item.corrected = it->second->hypothesis;
      item.gold_subtask1 = *l.subtask1 == CorrectionLabel::Accurate;
      item.gold_subtask2 = *l.subtask2 == ResidualLabel::HasErrors;
      (item.gold_subtask1 ? report.subtask1_true : report.subtask1_false)++;
      (item.gold_subtask2 ? report.subtask2_true : report.subtask2_false)++;
      set.items.push_back(std::move(item));
    }
  }
  std::sort(set.items.begin(), set.items.end(),
            [](const EvalItem& a, const EvalItem& b) { return a.id < b.id; });
  return {std::move(set), report};
}

std::string render_label_distribution(const EvalSetReport& r, const std::string& language) {
  std::ostringstream out;
  out << "Task\tLabel\t" << language << '\n';
  out << "subtask 1\tFalse\t" << r.subtask1_false << '\n';
  out << "subtask 1\tTrue\t" << r.subtask1_true << '\n';
  out << "subtask 2\tFalse\t" << r.subtask2_false << '\n';
  out << "subtask 2\tTrue\t" << r.subtask2_true << '\n';
  out << "# sampled\t" << r.sampled << '\n';
  out << "# excluded_undetermined\t" << r.excluded_undetermined << '\n';
  return out.str();
}

void write_eval_set(const std::filesystem::path& path, const EvalSet& set) {
  std::vector<Json> records;
  records.push_back({{"type", "header"}, {"language", set.language}});
  for (const auto& i : set.items)
    records.push_back({{"type", "item"},
                       {"id", i.id},
                       {"category", aligner::to_string(i.category)},
                       {"source", join_tokens(i.source)},
                       {"corrected", join_tokens(i.corrected)},
                       {"gold_subtask1", i.gold_subtask1},
                       {"gold_subtask2", i.gold_subtask2}});
  write_jsonl(path, records);
}

EvalSet read_eval_set(const std::filesystem::path& path) {
  EvalSet set;
  bool header = false;
  for (const auto& r : read_jsonl(path)) {
    try {
      if (r.at("type") == "header") {
        set.language = r.at("language").get<std::string>();
        header = true;
        continue;
      }
      EvalItem i;
      i.id = r.at("id").get<std::string>();
      i.category = aligner::parse_category(r.at("category").get<std::string>());
      i.source = split_tokens(r.at("source").get<std::string>());
      i.corrected = split_tokens(r.at("corrected").get<std::string>());
      i.gold_subtask1 = r.at("gold_subtask1").get<bool>();
      i.gold_subtask2 = r.at("gold_subtask2").get<bool>();
      set.items.push_back(std::move(i));
    } catch (const Json::exception& e) {
      throw FormatError(path.string() + ": malformed eval record: " + e.what());
    }
  }
  if (!header) throw FormatError(path.string() + ": eval set has no header record");
  return set;
}

// ---------------------------------------------------------------- prompts

namespace {

std::size_t count_occurrences(const std::string& s, std::string_view needle) {
  std::size_t n = 0;
  for (auto p = s.find(needle); p != std::string::npos; p = s.find(needle, p + needle.size()))
    ++n;
  return n;
}

}  // namespace

void PromptTemplate::validate() const {
  if (subtask != 1 && subtask != 2)
    throw TemplateError("template '" + name + "': subtask must be 1 or 2");
  for (auto ph : {kLanguagePlaceholder, kSentence1Placeholder, kSentence2Placeholder})
    if (count_occurrences(body, ph) > 1)
      throw TemplateError("template '" + name + "': placeholder " + std::string(ph) +
                          " appears more than once");
  if (count_occurrences(body, kSentence2Placeholder) == 0)
    throw TemplateError("template '" + name + "': missing placeholder {sentence 2}");
  if (subtask == 1 && count_occurrences(body, kSentence1Placeholder) == 0)
    throw TemplateError("template '" + name + "': subtask 1 needs placeholder {sentence 1}");
}

std::string language_name(const std::string& tag) {
  static const std::map<std::string, std::string> names = {
      {"id", "Indonesian"}, {"en", "English"}, {"ms", "Malay"}, {"jv", "Javanese"}};
  auto it = names.find(tag);
  return it == names.end() ? tag : it->second;
}

std::string render_prompt(const PromptTemplate& tmpl, const std::string& language_tag,
                          const TokenSeq& sentence1, const TokenSeq& sentence2, int subtask) {
  if (tmpl.subtask != subtask)
    throw TemplateError("template '" + tmpl.name + "' is for subtask " +
                        std::to_string(tmpl.subtask) + ", not " + std::to_string(subtask));
  tmpl.validate();
  // Values are substituted in one pass over the original body so a sentence
  // containing placeholder text is never re-expanded.
  std::string out;
  out.reserve(tmpl.body.size() + 256);
  const std::string s1 = join_tokens(sentence1), s2 = join_tokens(sentence2),
                    lang = language_name(language_tag);
  std::size_t i = 0;
  while (i < tmpl.body.size()) {
    auto matches = [&](std::string_view ph) { return tmpl.body.compare(i, ph.size(), ph) == 0; };
    if (matches(kLanguagePlaceholder)) {
      out += lang;
      i += kLanguagePlaceholder.size();
    } else if (matches(kSentence1Placeholder)) {
      out += s1;
      i += kSentence1Placeholder.size();
    } else if (matches(kSentence2Placeholder)) {
      out += s2;
      i += kSentence2Placeholder.size();
    } else {
      out += tmpl.body[i++];
    }
  }
  return out;
}

const std::vector<PromptTemplate>& builtin_templates() {
  static const std::vector<PromptTemplate> templates = [] {
    std::vector<PromptTemplate> t;
    t.push_back({"closed-en-1",
                 "Below are two {language} sentences. Sentence 1 may contain grammatical "
                 "errors and sentence 2 is a proposed correction of it.\n"
                 "Sentence 1: {sentence 1}\n"
                 "Sentence 2: {sentence 2}\n"
                 "Is sentence 2 an accurate correction of sentence 1? Reply with yes or no.",
                 1, "English"});
    t.push_back({"closed-en-2",
                 "Below is a {language} sentence produced by a grammar correction system.\n"
                 "Sentence: {sentence 2}\n"
                 "Does the sentence still contain grammatical errors? Reply with yes or no.",
                 2, "English"});
    t.push_back({"closed-id-1",
                 "Berikut dua kalimat berbahasa {language}. Kalimat 1 mungkin mengandung "
                 "kesalahan tata bahasa dan kalimat 2 adalah usulan perbaikannya.\n"
                 "Kalimat 1: {sentence 1}\n"
                 "Kalimat 2: {sentence 2}\n"
                 "Apakah kalimat 2 merupakan perbaikan yang tepat dari kalimat 1? "
                 "Jawab dengan yes atau no.",
                 1, "Indonesian"});
    t.push_back({"closed-id-2",
                 "Berikut sebuah kalimat berbahasa {language} hasil sistem perbaikan tata "
                 "bahasa.\n"
                 "Kalimat: {sentence 2}\n"
                 "Apakah kalimat tersebut masih mengandung kesalahan tata bahasa? "
                 "Jawab dengan yes atau no.",
                 2, "Indonesian"});
    t.push_back({"open-en-1",
                 "### Instruction:\nDecide whether the correction of a {language} sentence "
                 "is accurate. Answer yes or no.\n"
                 "### Input:\nOriginal: [{sentence 1}]\nCorrected: [{sentence 2}]\n"
                 "### Response:\n",
                 1, "English"});
    t.push_back({"open-en-2",
                 "### Instruction:\nDecide whether the {language} sentence in brackets still "
                 "contains grammatical errors. Answer yes or no.\n"
                 "### Input:\n[{sentence 2}]\n"
                 "### Response:\n",
                 2, "English"});
    for (const auto& x : t) x.validate();
    return t;
  }();
  return templates;
}

const PromptTemplate& builtin_template(const std::string& name) {
  for (const auto& t : builtin_templates())
    if (t.name == name) return t;
  throw TemplateError("no built-in template named '" + name + "'");
}

PromptTemplate load_template(const std::filesystem::path& path, int subtask,
                             const std::string& template_language) {
  PromptTemplate t{path.stem().string(), read_file(path), subtask, template_language};
  t.validate();
  return t;
}

// ---------------------------------------------------------------- verdicts

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::True: return "true";
    case Verdict::False: return "false";
    case Verdict::Unparseable: return "unparseable";
  }
  return "unparseable";
}

namespace {

// Words are maximal runs of ASCII alphanumerics and non-ASCII bytes.
std::vector<std::string> words_of(const std::string& text) {
  std::vector<std::string> words;
  std::string cur;
  for (unsigned char c : text) {
    if (std::isalnum(c) || c >= 0x80) {
      cur += static_cast<char>(std::tolower(c));
    } else if (!cur.empty()) {
      words.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) words.push_back(std::move(cur));
  return words;
}

bool phrase_at(const std::vector<std::string>& words, std::size_t i,
               const std::vector<std::string>& phrase) {
  if (phrase.empty() || i + phrase.size() > words.size()) return false;
  return std::equal(phrase.begin(), phrase.end(), words.begin() + static_cast<long>(i));
}

}  // namespace

Verdict parse_verdict(const std::string& raw_text, int subtask, const Lexicon& lexicon) {
  (void)subtask;  // both subtasks are phrased as yes/no questions
  auto to_phrases = [](const std::vector<std::string>& entries) {
    std::vector<std::vector<std::string>> out;
    for (const auto& e : entries) out.push_back(words_of(e));
    return out;
  };
  const auto affirm = to_phrases(lexicon.affirmations);
  const auto negate = to_phrases(lexicon.negations);
  const auto words = words_of(raw_text);
  for (std::size_t i = 0; i < words.size(); ++i) {
    const bool a = std::any_of(affirm.begin(), affirm.end(),
                               [&](const auto& p) { return phrase_at(words, i, p); });
    const bool n = std::any_of(negate.begin(), negate.end(),
                               [&](const auto& p) { return phrase_at(words, i, p); });
    if (a && n) return Verdict::Unparseable;
    if (a) return Verdict::True;
    if (n) return Verdict::False;
  }
  return Verdict::Unparseable;
}

// ---------------------------------------------------------------- metrics

double precision(std::size_t tp, std::size_t fp) {
  return tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
}

double recall(std::size_t tp, std::size_t fn) {
  return tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
}

double f_beta(double p, double r, double beta) {
  const double b2 = beta * beta;
  const double denom = b2 * p + r;
  return denom == 0 ? 0.0 : (1 + b2) * p * r / denom;
}

Metrics evaluate(const std::vector<bool>& golds, const std::vector<Verdict>& predictions,
                 bool positive_class, double beta) {
  if (golds.size() != predictions.size())
    throw AlignmentError("evaluate: " + std::to_string(golds.size()) + " gold labels but " +
                         std::to_string(predictions.size()) + " predictions");
  Metrics m;
  m.beta = beta;
  for (std::size_t i = 0; i < golds.size(); ++i) {
    if (predictions[i] == Verdict::Unparseable) {
      ++m.unparseable;
      continue;
    }
    const bool gold = golds[i] == positive_class;
    const bool pred = (predictions[i] == Verdict::True) == positive_class;
    if (pred && gold) ++m.tp;
    else if (pred) ++m.fp;
    else if (gold) ++m.fn;
    else ++m.tn;
  }
  m.precision = judge::precision(m.tp, m.fp);
  m.recall = judge::recall(m.tp, m.fn);
  m.f_beta = judge::f_beta(m.precision, m.recall, beta);
  return m;
}

// ---------------------------------------------------------------- endpoints

Json to_json(const DecodingParams& d) {
  return {{"temperature", d.temperature},
          {"presence_penalty", d.presence_penalty},
          {"frequency_penalty", d.frequency_penalty},
          {"beams", d.beams}};
}

EndpointConfig parse_endpoint_config(const std::string& text, const std::string& origin) {
  EndpointConfig c;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  auto number = [&](const std::string& key, const std::string& v) {
    try {
      std::size_t used = 0;
      double d = std::stod(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      return d;
    } catch (const std::exception&) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": '" + key +
                        "' expects a number, got '" + v + "'");
    }
  };
  while (std::getline(in, line)) {
    ++lineno;
    std::string s(trim(line));
    if (s.empty() || s[0] == '#' || s[0] == '[') continue;
    auto eq = s.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
    std::string key(trim(s.substr(0, eq))), value(trim(s.substr(eq + 1)));
    if (key == "name") c.name = value;
    else if (key == "base_url") c.base_url = value;
    else if (key == "path") c.path = value;
    else if (key == "model") c.model = value;
    else if (key == "api_key_env") c.api_key_env = value;
    else if (key == "timeout_seconds") c.timeout_seconds = number(key, value);
    else if (key == "max_concurrency") c.max_concurrency = static_cast<std::size_t>(number(key, value));
    else if (key == "requests_per_minute") c.requests_per_minute = number(key, value);
    else if (key == "max_retries") c.max_retries = static_cast<int>(number(key, value));
    else if (key == "backoff_initial_ms")
      c.backoff_initial = std::chrono::milliseconds(static_cast<long>(number(key, value)));
    else if (key == "temperature") c.decoding.temperature = number(key, value);
    else if (key == "presence_penalty") c.decoding.presence_penalty = number(key, value);
    else if (key == "frequency_penalty") c.decoding.frequency_penalty = number(key, value);
    else if (key == "beams") c.decoding.beams = static_cast<int>(number(key, value));
    else if (key == "mode") {
      if (value == "closed") c.mode = EndpointMode::Closed;
      else if (value == "open") c.mode = EndpointMode::Open;
      else throw ConfigError(origin + ": mode must be 'closed' or 'open', got '" + value + "'");
    } else if (key == "api_key") {
      throw ConfigError(origin + ": API keys are read from the environment only; set "
                        "api_key_env to the variable name instead");
    } else {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
  }
  if (c.base_url.empty()) throw ConfigError(origin + ": base_url is required");
  if (c.model.empty()) throw ConfigError(origin + ": model is required");
  if (c.max_concurrency == 0) throw ConfigError(origin + ": max_concurrency must be >= 1");
  if (c.max_retries < 0) throw ConfigError(origin + ": max_retries must be >= 0");
  return c;
}

EndpointConfig load_endpoint_config(const std::filesystem::path& path) {
  return parse_endpoint_config(read_file(path), path.string());
}

Json build_request(const EndpointConfig& config, const std::string& prompt) {
  Json body = {{"model", config.model},
               {"messages", Json::array({{{"role", "user"}, {"content", prompt}}})},
               {"temperature", config.decoding.temperature}};
  if (config.mode == EndpointMode::Closed) {
    body["presence_penalty"] = config.decoding.presence_penalty;
    body["frequency_penalty"] = config.decoding.frequency_penalty;
  } else {
    body["num_beams"] = config.decoding.beams;
  }
  return body;
}

namespace {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string prefix;  // path part, no trailing slash
};

SplitUrl split_url(const std::string& url) {
  auto scheme = url.find("://");
  if (scheme == std::string::npos)
    throw ConfigError("base_url '" + url + "' must start with http:// or https://");
  auto slash = url.find('/', scheme + 3);
  SplitUrl s;
  s.origin = url.substr(0, slash);
  if (slash != std::string::npos) s.prefix = url.substr(slash);
  while (!s.prefix.empty() && s.prefix.back() == '/') s.prefix.pop_back();
  return s;
}

std::string response_text(const std::string& body) {
  Json j;
  try {
    j = Json::parse(body);
  } catch (const Json::exception& e) {
    throw TransportError(std::string("response is not JSON: ") + e.what());
  }
  try {
    const auto& choice = j.at("choices").at(0);
    if (choice.contains("message")) return choice.at("message").at("content").get<std::string>();
    return choice.at("text").get<std::string>();
  } catch (const Json::exception& e) {
    throw TransportError(std::string("response has no completion text: ") + e.what());
  }
}

}  // namespace

std::string query_judge(const EndpointConfig& config, const std::string& prompt,
                        int* attempts_out, int* status_out) {
  const SplitUrl url = split_url(config.base_url);
  httplib::Client client(url.origin);
  const auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(
      std::chrono::duration<double>(config.timeout_seconds));
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);

  httplib::Headers headers;
  if (!config.api_key_env.empty())
    if (const char* key = std::getenv(config.api_key_env.c_str()); key && *key)
      headers.emplace("Authorization", std::string("Bearer ") + key);

  const std::string body = build_request(config, prompt).dump();
  const std::string target = url.prefix + config.path;
  auto delay = config.backoff_initial;
  ErrorKind last_kind = ErrorKind::Transport;
  std::string last_message;
  for (int attempt = 1; attempt <= config.max_retries + 1; ++attempt) {
    if (attempts_out) *attempts_out = attempt;
    if (attempt > 1) {
      std::this_thread::sleep_for(delay);
      delay *= 2;
    }
    auto res = client.Post(target, headers, body, "application/json");
    if (!res) {
      const auto err = res.error();
      last_kind = (err == httplib::Error::Read || err == httplib::Error::Write ||
                   err == httplib::Error::ConnectionTimeout)
                      ? ErrorKind::Timeout
                      : ErrorKind::Transport;
      last_message = "request to " + url.origin + target + " failed: " + httplib::to_string(err);
      continue;
    }
    if (status_out) *status_out = res->status;
    if (res->status == 401 || res->status == 403)
      throw AuthError("endpoint '" + config.name + "' rejected credentials (HTTP " +
                      std::to_string(res->status) + "); check $" + config.api_key_env);
    if (res->status == 429) {
      last_kind = ErrorKind::RateLimit;
      last_message = "endpoint '" + config.name + "' rate limited the request (HTTP 429)";
      continue;
    }
    if (res->status >= 500) {
      last_kind = ErrorKind::Transport;
      last_message = "endpoint '" + config.name + "' returned HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200)
      throw TransportError("endpoint '" + config.name + "' returned HTTP " +
                           std::to_string(res->status) + ": " + res->body.substr(0, 200));
    return response_text(res->body);
  }
  last_message += " (after " + std::to_string(config.max_retries + 1) + " attempts)";
  switch (last_kind) {
    case ErrorKind::RateLimit: throw RateLimitError(last_message);
    case ErrorKind::Timeout: throw TimeoutError(last_message);
    default: throw TransportError(last_message);
  }
}

ChatCompletionJudge::ChatCompletionJudge(EndpointConfig config) : config_(std::move(config)) {
  split_url(config_.base_url);
}

void ChatCompletionJudge::throttle() {
  if (config_.requests_per_minute <= 0) return;
  const auto interval = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
      std::chrono::duration<double>(60.0 / config_.requests_per_minute));
  std::chrono::steady_clock::time_point slot;
  {
    std::lock_guard lock(throttle_mutex_);
    const auto now = std::chrono::steady_clock::now();
    slot = std::max(now, next_slot_);
    next_slot_ = slot + interval;
  }
  std::this_thread::sleep_until(slot);
}

JudgeReply ChatCompletionJudge::query(const std::string& prompt, const QueryContext&) {
  JudgeReply reply;
  reply.request = build_request(config_, prompt);
  throttle();
  try {
    reply.text = query_judge(config_, prompt, &reply.attempts, &reply.http_status);
  } catch (const AuthError&) {
    throw;  // a credential problem fails every item; stop the run
  } catch (const Error& e) {
    reply.error = e.kind();
    reply.error_message = e.what();
  }
  return reply;
}

ScriptedJudge::ScriptedJudge(std::string name, std::string model, Script script)
    : name_(std::move(name)), model_(std::move(model)), script_(std::move(script)) {}

JudgeReply ScriptedJudge::query(const std::string& prompt, const QueryContext& context) {
  {
    std::lock_guard lock(mutex_);
    ++calls_;
  }
  JudgeReply reply;
  reply.attempts = 1;
  reply.request = {{"prompt", prompt}};
  try {
    reply.text = script_(prompt, context);
  } catch (const AuthError&) {
    throw;
  } catch (const Error& e) {
    reply.error = e.kind();
    reply.error_message = e.what();
  }
  return reply;
}

namespace {

std::string replay_key(const std::string& template_language, int subtask,
                       const std::string& item_id) {
  return template_language + '\x1f' + std::to_string(subtask) + '\x1f' + item_id;
}

}  // namespace

ReplayJudge::ReplayJudge(std::string name, std::string model, const std::vector<Json>& run_log)
    : name_(std::move(name)), model_(std::move(model)) {
  for (const auto& r : run_log) {
    try {
      if (r.at("endpoint") != name_ || r.at("model") != model_) continue;
      // Later entries win so a re-run log supersedes earlier attempts.
      entries_[replay_key(r.at("template_language").get<std::string>(),
                          r.at("subtask").get<int>(), r.at("item_id").get<std::string>())] = r;
    } catch (const Json::exception& e) {
      throw FormatError(std::string("malformed run log record: ") + e.what());
    }
  }
}

JudgeReply ReplayJudge::query(const std::string& prompt, const QueryContext& context) {
  JudgeReply reply;
  reply.request = {{"prompt", prompt}};
  auto it = entries_.find(replay_key(context.template_language, context.subtask, context.item_id));
  if (it == entries_.end()) {
    reply.error = ErrorKind::NotFound;
    reply.error_message = "run log has no response for item '" + context.item_id + "'";
    return reply;
  }
  const Json& r = it->second;
  reply.attempts = r.value("attempts", 1);
  reply.http_status = r.value("http_status", 0);
  if (r.contains("response") && r.at("response").is_string()) {
    reply.text = r.at("response").get<std::string>();
  } else {
    reply.error = ErrorKind::Transport;
    reply.error_message = r.value("error", std::string("recorded failure"));
  }
  return reply;
}

std::vector<std::pair<std::string, std::string>> run_log_endpoints(const std::vector<Json>& log) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& r : log) {
    std::pair<std::string, std::string> p{r.value("endpoint", std::string()),
                                          r.value("model", std::string())};
    if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(std::move(p));
  }
  return out;
}

// ---------------------------------------------------------------- benchmark

RunLog::RunLog(std::filesystem::path path) : path_(std::move(path)) {
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  std::ofstream touch(path_, std::ios::app);
  if (!touch) throw IoError(path_.string(), "cannot open run log");
}

void RunLog::append(const std::vector<Json>& records) {
  std::lock_guard lock(mutex_);
  std::ofstream out(path_, std::ios::app | std::ios::binary);
  if (!out) throw IoError(path_.string(), "cannot open run log");
  for (const auto& r : records) out << r.dump() << '\n';
  out.flush();
  if (!out) throw IoError(path_.string(), "write failed");
}

std::vector<BenchmarkRow> run_benchmark(const EvalSet& eval_set,
                                        const std::vector<PromptTemplate>& templates,
                                        const std::vector<Judge*>& judges, RunLog* run_log,
                                        const BenchmarkOptions& options) {
  for (const auto& t : templates) t.validate();
  std::vector<BenchmarkRow> rows;
  const auto& items = eval_set.items;
  for (Judge* judge : judges) {
    for (const auto& tmpl : templates) {
      std::vector<JudgeReply> replies(items.size());
      std::vector<std::string> prompts(items.size());
      parallel_for(items.size(), judge->max_concurrency(), [&](std::size_t i) {
        const auto& item = items[i];
        prompts[i] = render_prompt(tmpl, eval_set.language, item.source, item.corrected,
                                   tmpl.subtask);
        replies[i] = judge->query(prompts[i], {item.id, tmpl.subtask, tmpl.template_language});
      });

      BenchmarkRow row;
      row.language = eval_set.language;
      row.endpoint = judge->name();
      row.model = judge->model();
      row.template_language = tmpl.template_language;
      row.subtask = tmpl.subtask;
      row.items = items.size();
      std::vector<bool> golds;
      std::vector<Verdict> verdicts;
      std::vector<Json> log;
      for (std::size_t i = 0; i < items.size(); ++i) {
        const auto& reply = replies[i];
        Verdict v = Verdict::Unparseable;
        if (reply.text) v = parse_verdict(*reply.text, tmpl.subtask, options.lexicon);
        else ++row.transport_failures;
        golds.push_back(tmpl.subtask == 1 ? items[i].gold_subtask1 : items[i].gold_subtask2);
        verdicts.push_back(v);
        if (run_log) {
          Json r = {{"endpoint", judge->name()},
                    {"model", judge->model()},
                    {"template", tmpl.name},
                    {"template_language", tmpl.template_language},
                    {"subtask", tmpl.subtask},
                    {"item_id", items[i].id},
                    {"prompt", prompts[i]},
                    {"request", reply.request},
                    {"attempts", reply.attempts},
                    {"http_status", reply.http_status},
                    {"response", reply.text ? Json(*reply.text) : Json(nullptr)},
                    {"verdict", to_string(v)}};
          if (reply.error) {
            r["error_kind"] = std::string(error_code(*reply.error));
            r["error"] = reply.error_message;
          }
          log.push_back(std::move(r));
        }
      }
      if (run_log) run_log->append(log);
      row.metrics = evaluate(golds, verdicts, true, options.beta);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

namespace {

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

}  // namespace

std::string render_benchmark(const std::vector<BenchmarkRow>& rows) {
  std::ostringstream out;
  for (int subtask : {1, 2}) {
    bool any = std::any_of(rows.begin(), rows.end(),
                           [&](const BenchmarkRow& r) { return r.subtask == subtask; });
    if (!any) continue;
    out << "# subtask " << subtask << '\n';
    out << "Language\tModel\tP\tR\tF\ttp\tfp\tfn\ttn\tunparseable\ttransport_failures\n";
    for (const auto& r : rows) {
      if (r.subtask != subtask) continue;
      const auto& m = r.metrics;
      out << language_name(r.language) << '\t' << r.model << " (" << r.template_language
          << " Template)\t" << fixed4(m.precision) << '\t' << fixed4(m.recall) << '\t'
          << fixed4(m.f_beta) << '\t' << m.tp << '\t' << m.fp << '\t' << m.fn << '\t' << m.tn
          << '\t' << m.unparseable << '\t' << r.transport_failures << '\n';
    }
  }
  return out.str();
}

std::vector<Json> benchmark_records(const std::vector<BenchmarkRow>& rows) {
  std::vector<Json> out;
  for (const auto& r : rows) {
    const auto& m = r.metrics;
    out.push_back({{"language", r.language},
                   {"endpoint", r.endpoint},
                   {"model", r.model},
                   {"template_language", r.template_language},
                   {"subtask", r.subtask},
                   {"items", r.items},
                   {"tp", m.tp},
                   {"fp", m.fp},
                   {"fn", m.fn},
                   {"tn", m.tn},
                   {"unparseable", m.unparseable},
                   {"transport_failures", r.transport_failures},
                   {"precision", m.precision},
                   {"recall", m.recall},
                   {"f", m.f_beta},
                   {"beta", m.beta}});
  }
  return out;
}

}  // namespace gecforge::judge
