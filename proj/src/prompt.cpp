#include "xalign/prompt.hpp"

#include <algorithm>
#include <array>
#include <string_view>

#include "xalign/errors.hpp"
#include "xalign/util.hpp"

namespace xalign {

namespace {

struct BuiltinTemplate {
  const char* language;
  PromptMode mode;
  const char* text;
};

constexpr const char* kEnZeroShot =
    R"TPL(You will be given a multiple-choice question. Think it through step by step.
Write an explanation first, then give your final answer as a single option letter.
Use exactly this format:
Explanation: <your reasoning>
Answer: <option letter>

Question: {stem}
Options:
{options}
)TPL";

constexpr const char* kEnWithEvidence =
    R"TPL(You will be given a multiple-choice question together with evidence passages.
Use the evidence when it helps. Think it through step by step.
Write an explanation first, then give your final answer as a single option letter.
Use exactly this format:
Explanation: <your reasoning>
Answer: <option letter>

Evidence:
{evidence}

Question: {stem}
Options:
{options}
)TPL";

constexpr const char* kZhZeroShot =
    R"TPL(下面是一道单项选择题。请逐步思考。
请先写出解释，再以单个选项字母给出最终答案。
请严格按照以下格式作答：
解释：<你的推理>
答案：<选项字母>

问题：{stem}
选项：
{options}
)TPL";

constexpr const char* kZhWithEvidence =
    R"TPL(下面是一道单项选择题，并附有证据段落。
如有帮助，请参考证据。请逐步思考。
请先写出解释，再以单个选项字母给出最终答案。
请严格按照以下格式作答：
解释：<你的推理>
答案：<选项字母>

证据：
{evidence}

问题：{stem}
选项：
{options}
)TPL";

constexpr const char* kFrZeroShot =
    R"TPL(Voici une question à choix multiple. Raisonnez étape par étape.
Écrivez d'abord une explication, puis donnez votre réponse finale sous la forme d'une seule lettre.
Utilisez exactement ce format:
Explication: <votre raisonnement>
Réponse: <lettre>

Question: {stem}
Options:
{options}
)TPL";

constexpr const char* kFrWithEvidence =
    R"TPL(Voici une question à choix multiple accompagnée de passages de référence.
Utilisez ces passages s'ils sont utiles. Raisonnez étape par étape.
Écrivez d'abord une explication, puis donnez votre réponse finale sous la forme d'une seule lettre.
Utilisez exactement ce format:
Explication: <votre raisonnement>
Réponse: <lettre>

Passages:
{evidence}

Question: {stem}
Options:
{options}
)TPL";

constexpr const char* kDeZeroShot =
    R"TPL(Im Folgenden steht eine Multiple-Choice-Frage. Denken Sie Schritt für Schritt.
Schreiben Sie zuerst eine Erklärung und geben Sie dann Ihre endgültige Antwort als einzelnen Buchstaben an.
Verwenden Sie genau dieses Format:
Erklärung: <Ihre Begründung>
Antwort: <Buchstabe>

Frage: {stem}
Optionen:
{options}
)TPL";

constexpr const char* kDeWithEvidence =
    R"TPL(Im Folgenden steht eine Multiple-Choice-Frage zusammen mit Belegtexten.
Nutzen Sie die Belege, wenn sie helfen. Denken Sie Schritt für Schritt.
Schreiben Sie zuerst eine Erklärung und geben Sie dann Ihre endgültige Antwort als einzelnen Buchstaben an.
Verwenden Sie genau dieses Format:
Erklärung: <Ihre Begründung>
Antwort: <Buchstabe>

Belege:
{evidence}

Frage: {stem}
Optionen:
{options}
)TPL";

constexpr const char* kItZeroShot =
    R"TPL(Di seguito è riportata una domanda a scelta multipla. Ragiona passo dopo passo.
Scrivi prima una spiegazione, poi fornisci la risposta finale come singola lettera.
Usa esattamente questo formato:
Spiegazione: <il tuo ragionamento>
Risposta: <lettera>

Domanda: {stem}
Opzioni:
{options}
)TPL";

constexpr const char* kItWithEvidence =
    R"TPL(Di seguito è riportata una domanda a scelta multipla con passaggi di riferimento.
Usa i passaggi se sono utili. Ragiona passo dopo passo.
Scrivi prima una spiegazione, poi fornisci la risposta finale come singola lettera.
Usa esattamente questo formato:
Spiegazione: <il tuo ragionamento>
Risposta: <lettera>

Passaggi:
{evidence}

Domanda: {stem}
Opzioni:
{options}
)TPL";

constexpr const char* kJaZeroShot =
    R"TPL(次の選択式問題を解いてください。段階的に考えてください。
まず説明を書き、その後に最終的な答えを選択肢の文字一つで示してください。
必ず次の形式で答えてください：
説明：<あなたの推論>
答え：<選択肢の文字>

問題：{stem}
選択肢：
{options}
)TPL";

constexpr const char* kJaWithEvidence =
    R"TPL(次の選択式問題を参考資料とともに解いてください。
役立つ場合は参考資料を使ってください。段階的に考えてください。
まず説明を書き、その後に最終的な答えを選択肢の文字一つで示してください。
必ず次の形式で答えてください：
説明：<あなたの推論>
答え：<選択肢の文字>

参考資料：
{evidence}

問題：{stem}
選択肢：
{options}
)TPL";

constexpr std::array<BuiltinTemplate, 12> kBuiltins = {{
    {"en", PromptMode::ZeroShot, kEnZeroShot},
    {"en", PromptMode::WithEvidence, kEnWithEvidence},
    {"zh", PromptMode::ZeroShot, kZhZeroShot},
    {"zh", PromptMode::WithEvidence, kZhWithEvidence},
    {"fr", PromptMode::ZeroShot, kFrZeroShot},
    {"fr", PromptMode::WithEvidence, kFrWithEvidence},
    {"de", PromptMode::ZeroShot, kDeZeroShot},
    {"de", PromptMode::WithEvidence, kDeWithEvidence},
    {"it", PromptMode::ZeroShot, kItZeroShot},
    {"it", PromptMode::WithEvidence, kItWithEvidence},
    {"ja", PromptMode::ZeroShot, kJaZeroShot},
    {"ja", PromptMode::WithEvidence, kJaWithEvidence},
}};

void replace_all(std::string& text, std::string_view placeholder, std::string_view value) {
  std::size_t pos = 0;
  while ((pos = text.find(placeholder, pos)) != std::string::npos) {
    text.replace(pos, placeholder.size(), value);
    pos += value.size();
  }
}

}  // namespace

std::string prompt_mode_name(PromptMode mode) {
  return mode == PromptMode::ZeroShot ? "zero-shot" : "with-evidence";
}

PromptMode prompt_mode_from_string(const std::string& s) {
  if (s == "zero-shot") return PromptMode::ZeroShot;
  if (s == "with-evidence") return PromptMode::WithEvidence;
  throw ConfigError("unknown prompt mode: " + s, {"prompt.mode"});
}

const TemplateStore& TemplateStore::builtin() {
  static const TemplateStore store = [] {
    TemplateStore s;
    for (const auto& b : kBuiltins) {
      s.add(PromptTemplate{LanguageTag(b.language), b.mode, b.text});
    }
    return s;
  }();
  return store;
}

TemplateStore TemplateStore::load_dir(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw IoError("template directory not found: " + dir.string());
  TemplateStore store;
  std::vector<fs::path> subdirs;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_directory()) subdirs.push_back(entry.path());
  }
  std::sort(subdirs.begin(), subdirs.end());
  for (const auto& sub : subdirs) {
    LanguageTag lang = LanguageTag::parse(sub.filename().string());
    for (PromptMode mode : {PromptMode::ZeroShot, PromptMode::WithEvidence}) {
      fs::path file = sub / (prompt_mode_name(mode) + ".txt");
      if (!fs::exists(file)) continue;
      store.add(PromptTemplate{lang, mode, read_file(file)});
    }
  }
  return store;
}

void TemplateStore::add(PromptTemplate tpl) {
  const std::string where = "template " + tpl.language.code + "/" + prompt_mode_name(tpl.mode);
  if (tpl.text.find("{stem}") == std::string::npos) {
    throw SchemaError(where + ": missing {stem} placeholder");
  }
  if (tpl.text.find("{options}") == std::string::npos) {
    throw SchemaError(where + ": missing {options} placeholder");
  }
  if (tpl.mode == PromptMode::WithEvidence &&
      tpl.text.find("{evidence}") == std::string::npos) {
    throw SchemaError(where + ": missing {evidence} placeholder");
  }
  templates_[{tpl.language.code, tpl.mode}] = std::move(tpl);
}

bool TemplateStore::has(const LanguageTag& lang, PromptMode mode) const {
  return templates_.count({lang.code, mode}) > 0;
}

const PromptTemplate& TemplateStore::get(const LanguageTag& lang, PromptMode mode) const {
  auto it = templates_.find({lang.code, mode});
  if (it == templates_.end()) {
    throw ConfigError("no " + prompt_mode_name(mode) + " template for language " + lang.code,
                      {"prompt.templates_dir"});
  }
  return it->second;
}

std::string TemplateStore::content_digest() const {
  std::string blob;
  for (const auto& [key, tpl] : templates_) {
    blob += key.first;
    blob += '\x1f';
    blob += prompt_mode_name(key.second);
    blob += '\x1f';
    blob += tpl.text;
    blob += '\x1e';
  }
  return sha256_hex(blob);
}

void TemplateStore::validate_against(const MarkerLexicon& lexicon) const {
  for (const auto& [key, tpl] : templates_) {
    const std::string where = "template " + key.first + "/" + prompt_mode_name(key.second);
    bool has_answer = false;
    for (const auto& m : lexicon.answer_markers(tpl.language)) {
      if (tpl.text.find(m) != std::string::npos) has_answer = true;
    }
    bool has_explanation = false;
    for (const auto& m : lexicon.explanation_markers(tpl.language)) {
      if (tpl.text.find(m) != std::string::npos) has_explanation = true;
    }
    if (!has_answer || !has_explanation) {
      throw SchemaError(where + ": must instruct an explanation section followed by an answer "
                        "section using the configured markers");
    }
  }
}

std::string render_prompt(const Question& question, PromptMode mode,
                          const EvidenceBlock* evidence, const TemplateStore& store) {
  const PromptTemplate& tpl = store.get(question.language, mode);
  std::string evidence_text;
  if (mode == PromptMode::WithEvidence) {
    if (evidence == nullptr) {
      throw EvidenceLanguageMismatchError("question " + question.id + " (" +
                                          question.language.code +
                                          "): evidence required in with-evidence mode");
    }
    if (evidence->language != question.language || evidence->question_id != question.id) {
      throw EvidenceLanguageMismatchError(
          "question " + question.id + " (" + question.language.code + "): evidence is for " +
          evidence->question_id + " (" + evidence->language.code + ")");
    }
    for (std::size_t i = 0; i < evidence->passages.size(); ++i) {
      if (i) evidence_text += "\n";
      evidence_text += evidence->passages[i];
    }
  }
  std::string options_text;
  for (std::size_t i = 0; i < question.options.size(); ++i) {
    if (i) options_text += "\n";
    options_text += std::string(1, question.options[i].label) + ". " + question.options[i].text;
  }
  std::string out = tpl.text;
  replace_all(out, "{evidence}", evidence_text);
  replace_all(out, "{stem}", question.stem);
  replace_all(out, "{options}", options_text);
  return out;
}

}  // namespace xalign
