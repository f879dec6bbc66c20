"""Walk through feature extraction on the bundled sample questions."""
from qclf import features as qf
from qclf.synth import bundled_sample

records = {r.text: r for r in bundled_sample()}
question = records["ke gOdZa prawiRTA karena ?"]

print("question:", question.text, "->", question.label)
print("interrogatives:", qf.wh_positions(question), "type:", qf.wh_type(question))
print("head word:", qf.find_head_word(question).text)

for name, extract in [("lexical", qf.extract_lexical), ("syntactic", qf.extract_syntactic),
                      ("semantic", qf.extract_semantic)]:
    print(f"\n{name} features")
    for feat, value in sorted(extract(question).items()):
        print(f"  {feat.namespace}:{feat.key} = {value}")

config = qf.FeatureConfig.from_name("fl+fs+fm")
index = qf.build_feature_index(list(records.values()), config)
vector = qf.vectorize(question, index, config)
print(f"\nfeature space: {index.N} columns; this question uses {vector.nnz}")
