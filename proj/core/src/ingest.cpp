#include "proofrl/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "proofrl/errors.hpp"

namespace proofrl {

using nlohmann::json;

IdSet tokenize(const std::string& text) {
  IdSet tokens;
  std::string current;
  for (const char ch : text) {
    if (std::isalnum(static_cast<unsigned char>(ch))) {
      current += static_cast<char>(
          std::tolower(static_cast<unsigned char>(ch)));
    } else if (!current.empty()) {
      tokens.insert(current);
      current.clear();
    }
  }
  if (!current.empty()) tokens.insert(current);
  return tokens;
}

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

bool all_digits(const std::string& s) {
  return !s.empty() &&
         std::all_of(s.begin(), s.end(), [](unsigned char c) {
           return std::isdigit(c);
         });
}

// "sent12" -> "x12", "int3" -> "i3", "hypothesis" -> "h"; others unchanged.
std::string normalize_id(const std::string& raw) {
  if (raw == "hypothesis" || raw == "h") return "h";
  if (raw.rfind("sent", 0) == 0 && all_digits(raw.substr(4))) {
    return "x" + raw.substr(4);
  }
  if (raw.rfind("int", 0) == 0 && all_digits(raw.substr(3))) {
    return "i" + raw.substr(3);
  }
  return raw;
}

struct Cursor {
  const std::string& text;
  std::pair<std::size_t, std::size_t> line_col(std::size_t pos) const {
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i < pos && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    return {line, col};
  }
  [[noreturn]] void fail(const std::string& what, std::size_t pos) const {
    const auto [line, col] = line_col(pos);
    throw ParseError(what, line, col);
  }
};

// Splits on `sep` at the top level, keeping each piece's start offset.
std::vector<std::pair<std::string, std::size_t>> split_with_offsets(
    const std::string& text, char sep) {
  std::vector<std::pair<std::string, std::size_t>> parts;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (i == text.size() || text[i] == sep) {
      parts.emplace_back(text.substr(start, i - start), start);
      start = i + 1;
    }
  }
  return parts;
}

}  // namespace

ProofDag parse_proof(const std::string& text, const SentenceMap& sentences) {
  const Cursor cur{text};
  ProofDag dag;
  IdSet concluded;

  // Segment offsets point at the first non-whitespace character, so parse
  // errors land on the offending token's line.
  const auto segments = split_with_offsets(text, ';');
  std::vector<std::pair<std::string, std::size_t>> steps;
  for (const auto& [seg, off] : segments) {
    const std::size_t first = seg.find_first_not_of(" \t\r\n");
    if (first != std::string::npos) {
      steps.emplace_back(seg.substr(first), off + first);
    }
  }
  if (steps.empty()) cur.fail("empty proof", 0);

  for (std::size_t s = 0; s < steps.size(); ++s) {
    const auto& [segment, offset] = steps[s];
    const std::size_t arrow = segment.find("->");
    if (arrow == std::string::npos) {
      cur.fail("step is missing '->'", offset);
    }

    IdSet premises;
    for (const auto& [tok, tok_off] :
         split_with_offsets(segment.substr(0, arrow), '&')) {
      const std::string raw = trim(tok);
      if (raw.empty()) cur.fail("empty premise", offset + tok_off);
      const std::string id = normalize_id(raw);
      if (id == "h") {
        cur.fail("'hypothesis' may only appear as the final conclusion",
                 offset + tok_off);
      }
      if (!is_fact_id(id) && !is_intermediate_id(id)) {
        cur.fail("'" + raw + "' is not a valid premise id", offset + tok_off);
      }
      if (!concluded.contains(id) && !sentences.count(id)) {
        throw UnknownId("premise '" + raw +
                        "' has no sentence entry and is not a prior "
                        "conclusion");
      }
      premises.insert(id);
    }
    if (premises.size() < 2) {
      cur.fail("step needs at least 2 distinct premises", offset);
    }

    const std::string rhs = segment.substr(arrow + 2);
    const std::size_t colon = rhs.find(':');
    const std::string raw_id = trim(rhs.substr(0, colon));
    if (raw_id.empty()) cur.fail("missing conclusion id", offset + arrow + 2);
    const std::string id = normalize_id(raw_id);
    if (id == "h") {
      if (s + 1 != steps.size()) {
        cur.fail("'hypothesis' may only appear as the final conclusion",
                 offset + arrow + 2);
      }
    } else if (!is_intermediate_id(id)) {
      cur.fail("'" + raw_id + "' is not a valid conclusion id",
               offset + arrow + 2);
    }
    if (concluded.contains(id)) {
      cur.fail("conclusion '" + raw_id + "' already concluded",
               offset + arrow + 2);
    }

    Sentence conclusion;
    conclusion.id = id;
    conclusion.kind = SentenceKind::Intermediate;
    if (colon != std::string::npos) {
      conclusion.text = trim(rhs.substr(colon + 1));
      conclusion.symbols = tokenize(conclusion.text);
    } else if (auto it = sentences.find(id); it != sentences.end()) {
      conclusion = it->second;
      conclusion.id = id;
      conclusion.kind = SentenceKind::Intermediate;
    }

    concluded.insert(id);
    dag.steps.push_back(Step{std::move(premises), std::move(conclusion)});
  }

  dag.root = dag.steps.back().conclusion.id;
  for (const Step& step : dag.steps) {
    for (const std::string& premise : step.premises) {
      if (!concluded.contains(premise)) dag.leaves.insert(premise);
    }
  }
  return dag;
}

std::string serialize_proof(const ProofDag& dag) {
  std::string out;
  for (std::size_t s = 0; s < dag.steps.size(); ++s) {
    const Step& step = dag.steps[s];
    if (s) out += "; ";
    out += step.premises.joined(" & ");
    out += " -> ";
    if (step.conclusion.id == dag.root && dag.root == "h") {
      out += "hypothesis";
      continue;
    }
    out += step.conclusion.id;
    if (!step.conclusion.text.empty()) {
      out += ": " + step.conclusion.text;
    } else if (!step.conclusion.symbols.empty()) {
      out += ": " + step.conclusion.symbols.joined(" ");
    }
  }
  return out;
}

namespace {

Sentence sentence_from_text(const std::string& id, const std::string& text) {
  return Sentence{id, tokenize(text),
                  is_fact_id(id) ? SentenceKind::Fact
                                 : SentenceKind::Intermediate,
                  text};
}

DatasetRecord record_from_json(const json& j) {
  DatasetRecord record;
  if (j.contains("id")) {
    record.id = j.at("id").is_string() ? j.at("id").get<std::string>()
                                       : j.at("id").dump();
  }
  record.hypothesis_text = j.at("hypothesis").get<std::string>();

  const json* sentences = nullptr;
  if (j.contains("sentences")) {
    sentences = &j.at("sentences");
  } else if (j.contains("meta") && j.at("meta").contains("triples")) {
    sentences = &j.at("meta").at("triples");
  } else {
    throw IoError("record has neither 'sentences' nor 'meta.triples'");
  }
  for (const auto& [key, value] : sentences->items()) {
    const std::string id = normalize_id(key);
    record.sentences[id] = sentence_from_text(id, value.get<std::string>());
  }
  if (j.contains("meta") && j.at("meta").contains("intermediate_conclusions")) {
    for (const auto& [key, value] :
         j.at("meta").at("intermediate_conclusions").items()) {
      const std::string id = normalize_id(key);
      record.sentences[id] = sentence_from_text(id, value.get<std::string>());
    }
  }
  record.sentences["h"] = sentence_from_text("h", record.hypothesis_text);

  record.gold = parse_proof(j.at("proof").get<std::string>(),
                            record.sentences);
  return record;
}

}  // namespace

LoadResult load_dataset(const std::string& path, bool strict) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");

  LoadResult result;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      result.records.push_back(record_from_json(json::parse(line)));
    } catch (const std::exception& e) {
      if (strict) {
        throw ParseError(std::string("bad record: ") + e.what(), line_no, 1);
      }
      result.warnings.push_back("line " + std::to_string(line_no) +
                                " skipped: " + e.what());
    }
  }
  return result;
}

std::string serialize_record(const DatasetRecord& record) {
  json j;
  j["id"] = record.id;
  j["hypothesis"] = record.hypothesis_text;
  json sentences = json::object();
  for (const auto& [id, sentence] : record.sentences) {
    if (sentence.kind == SentenceKind::Fact) sentences[id] = sentence.text;
  }
  j["sentences"] = std::move(sentences);
  j["proof"] = serialize_proof(record.gold);
  return j.dump();
}

void write_tasks(const std::string& path, const std::vector<Task>& tasks) {
  std::string out;
  for (const Task& task : tasks) {
    json j;
    j["id"] = task.id;
    j["hypothesis"] = {{"id", task.hypothesis.id},
                       {"symbols", task.hypothesis.symbols.items()}};
    json facts = json::array();
    for (const Sentence& fact : task.facts) {
      facts.push_back({{"id", fact.id}, {"symbols", fact.symbols.items()}});
    }
    j["facts"] = std::move(facts);
    json steps = json::array();
    for (const Step& step : task.gold.steps) {
      steps.push_back(step.premises.joined(" & ") + " -> " +
                      step.conclusion.id);
    }
    j["gold_steps"] = std::move(steps);
    j["mode"] = to_string(task.mode);
    out += j.dump();
    out += '\n';
  }
  write_text_file(path, out);
}

std::vector<Task> load_tasks(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");

  std::vector<Task> tasks;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const std::exception& e) {
      throw ParseError(std::string("bad task json: ") + e.what(), line_no, 1);
    }

    Task task;
    task.id = j.value("id", "");
    task.mode = dag_mode_from_string(j.value("mode", "tree"));

    SentenceMap table;
    for (const auto& f : j.at("facts")) {
      Sentence fact;
      fact.id = f.at("id").get<std::string>();
      for (const auto& sym : f.at("symbols")) {
        fact.symbols.insert(sym.get<std::string>());
      }
      fact.kind = SentenceKind::Fact;
      table[fact.id] = fact;
      task.facts.push_back(std::move(fact));
    }

    task.hypothesis.id = j.at("hypothesis").at("id").get<std::string>();
    for (const auto& sym : j.at("hypothesis").at("symbols")) {
      task.hypothesis.symbols.insert(sym.get<std::string>());
    }
    task.hypothesis.kind = SentenceKind::Intermediate;

    std::string joined;
    for (const auto& s : j.at("gold_steps")) {
      if (!joined.empty()) joined += "; ";
      joined += s.get<std::string>();
    }
    task.gold = parse_proof(joined, table);
    task.gold.mode = task.mode;

    // Conclusion contents are symbol-set unions of their premises.
    SentenceMap known = table;
    for (Step& step : task.gold.steps) {
      IdSet symbols;
      for (const std::string& premise : step.premises) {
        symbols = symbols.set_union(known.at(premise).symbols);
      }
      step.conclusion.symbols = std::move(symbols);
      known[step.conclusion.id] = step.conclusion;
    }
    if (!(task.gold.steps.back().conclusion.symbols ==
          task.hypothesis.symbols)) {
      throw ParseError("task '" + task.id +
                           "': gold root content does not match hypothesis",
                       line_no, 1);
    }
    tasks.push_back(std::move(task));
  }
  return tasks;
}

namespace {

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", v);
  return buf;
}

std::string g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string g6(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

std::string format_report(const AggregateReport& report) {
  std::string out = "{";
  out += "\"n\": " + std::to_string(report.n);
  out += ", \"leaves_f1\": " + pct(report.leaves_f1);
  out += ", \"leaves_ac\": " + pct(report.leaves_ac);
  out += ", \"steps_f1\": " + pct(report.steps_f1);
  out += ", \"steps_ac\": " + pct(report.steps_ac);
  out += ", \"inter_f1\": " + pct(report.inter_f1);
  out += ", \"inter_ac\": " + pct(report.inter_ac);
  out += ", \"overall_ac\": " + pct(report.overall_ac);
  out += ", \"graph_ac\": " + pct(report.graph_ac);
  out += "}";
  return out;
}

void write_report(const AggregateReport& report, const std::string& path) {
  write_text_file(path, format_report(report) + "\n");
}

AggregateReport read_report(const std::string& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const std::exception& e) {
    throw IoError("bad report json in '" + path + "': " + e.what());
  }
  AggregateReport report;
  report.n = j.at("n").get<std::size_t>();
  report.leaves_f1 = j.at("leaves_f1").get<double>();
  report.leaves_ac = j.at("leaves_ac").get<double>();
  report.steps_f1 = j.at("steps_f1").get<double>();
  report.steps_ac = j.at("steps_ac").get<double>();
  report.inter_f1 = j.at("inter_f1").get<double>();
  report.inter_ac = j.at("inter_ac").get<double>();
  report.overall_ac = j.at("overall_ac").get<double>();
  report.graph_ac = j.at("graph_ac").get<double>();
  return report;
}

namespace {

void append_mlp(std::string& out, const std::string& name, const Mlp& m) {
  out += "mlp " + name + " " + std::to_string(m.in_dim) + " " +
         std::to_string(m.hidden_dim) + "\n";
  out += "w1\n";
  for (int j = 0; j < m.hidden_dim; ++j) {
    for (int i = 0; i < m.in_dim; ++i) {
      if (i) out += ' ';
      out += g17(m.w1[static_cast<std::size_t>(j) * m.in_dim + i]);
    }
    out += '\n';
  }
  auto row = [&](const std::string& label, const std::vector<double>& v) {
    out += label + "\n";
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) out += ' ';
      out += g17(v[i]);
    }
    out += '\n';
  };
  row("b1", m.b1);
  row("w2", m.w2);
  out += "b2\n" + g17(m.b2) + "\n";
}

class LineReader {
 public:
  LineReader(const std::string& text, const std::string& path)
      : stream_(text), path_(path) {}

  std::string next() {
    std::string line;
    if (!std::getline(stream_, line)) {
      throw IoError("truncated checkpoint '" + path_ + "'");
    }
    return line;
  }

  std::vector<double> next_row(std::size_t expected) {
    std::istringstream row(next());
    std::vector<double> values;
    double v;
    while (row >> v) values.push_back(v);
    if (values.size() != expected) {
      throw IoError("checkpoint row in '" + path_ + "' has " +
                    std::to_string(values.size()) + " values, expected " +
                    std::to_string(expected));
    }
    return values;
  }

  void expect(const std::string& token) {
    const std::string line = next();
    if (line != token) {
      throw IoError("checkpoint '" + path_ + "': expected '" + token +
                    "', got '" + line + "'");
    }
  }

 private:
  std::istringstream stream_;
  std::string path_;
};

Mlp read_mlp(LineReader& reader, const std::string& name,
             const std::string& path) {
  std::istringstream header(reader.next());
  std::string tag, got_name;
  int in_dim = 0, hidden_dim = 0;
  header >> tag >> got_name >> in_dim >> hidden_dim;
  if (tag != "mlp" || got_name != name || in_dim < 1 || hidden_dim < 1) {
    throw IoError("checkpoint '" + path + "': bad mlp header for '" + name +
                  "'");
  }
  Mlp m = Mlp::zeros(in_dim, hidden_dim);
  reader.expect("w1");
  for (int j = 0; j < hidden_dim; ++j) {
    const auto row = reader.next_row(static_cast<std::size_t>(in_dim));
    std::copy(row.begin(), row.end(),
              m.w1.begin() + static_cast<std::ptrdiff_t>(j) * in_dim);
  }
  reader.expect("b1");
  m.b1 = reader.next_row(static_cast<std::size_t>(hidden_dim));
  reader.expect("w2");
  m.w2 = reader.next_row(static_cast<std::size_t>(hidden_dim));
  reader.expect("b2");
  m.b2 = reader.next_row(1)[0];
  return m;
}

}  // namespace

void write_checkpoint(const std::string& path, const PolicyParams& policy,
                      const CriticParams& critic) {
  std::string out = "proofrl-checkpoint v1\n";
  append_mlp(out, "policy", policy.scorer);
  append_mlp(out, "critic", critic.value_head);
  write_text_file(path, out);
}

std::pair<PolicyParams, CriticParams> load_checkpoint(
    const std::string& path) {
  LineReader reader(read_text_file(path), path);
  reader.expect("proofrl-checkpoint v1");
  PolicyParams policy{read_mlp(reader, "policy", path)};
  CriticParams critic{read_mlp(reader, "critic", path)};
  return {std::move(policy), std::move(critic)};
}

std::string format_log(const TrainLog& log) {
  std::string out =
      "epoch,policy_loss,critic_loss,entropy,mean_reward,leaves_f1,steps_f1,"
      "inter_f1,overall_allcorrect\n";
  auto opt = [&](const std::optional<double>& v) {
    return v ? pct(*v) : std::string();
  };
  for (const TrainLogRow& row : log.rows) {
    out += std::to_string(row.epoch);
    out += "," + g6(row.policy_loss);
    out += "," + g6(row.critic_loss);
    out += "," + g6(row.entropy);
    out += "," + g6(row.mean_reward);
    out += "," + opt(row.leaves_f1);
    out += "," + opt(row.steps_f1);
    out += "," + opt(row.inter_f1);
    out += "," + opt(row.overall_allcorrect);
    out += "\n";
  }
  return out;
}

void write_log(const TrainLog& log, const std::string& path) {
  write_text_file(path, format_log(log));
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << content;
  out.flush();
  if (!out) throw IoError("failed writing '" + path + "'");
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace proofrl
