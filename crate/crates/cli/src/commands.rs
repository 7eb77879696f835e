use std::path::Path;

use collider_audit::demo::{ColliderDemo, DEMO_DAG};
use collider_audit::evaluation::{compare_report, example_table, Comparison};
use collider_audit::scm::SYNTHETIC_DAG;
use collider_audit::{
    fit_distribution, generate_synthetic, load_csv, validate_for_audit, AuditConfig, AuditRoles, ClassifierModel, Dag,
    Dataset, EmpiricalJointDistribution, LookupTable, NodePartition, Schema, SyntheticConfig,
};
use serde_json::json;

use crate::error::CliError;
use crate::manifest::{with_suffix, RunManifest};
use crate::{AuditArgs, AuditInputs, CheckDagArgs, DemoArgs, EvalArgs, FitDistArgs, GenArgs};

fn pretty(value: &serde_json::Value) -> String {
    serde_json::to_string_pretty(value).expect("JSON value serializes") + "\n"
}

pub fn generate(args: &GenArgs) -> Result<(), CliError> {
    let cfg = SyntheticConfig {
        n: args.n as usize,
        seed: args.seed,
        delta: args.delta,
        collider_y_weight: args.collider_y,
        collider_a_weight: args.collider_a,
        noise_bound: args.noise,
    };
    let data = generate_synthetic(&cfg)?;
    let mut m = RunManifest::new("gen", args);
    m.seed("generator", args.seed);
    m.write(&args.out, &data.to_csv())?;
    m.write(&with_suffix(&args.out, ".dag"), SYNTHETIC_DAG)?;
    eprintln!("generated {} records", data.len());
    m.finish(&with_suffix(&args.out, ".manifest.json"))
}

fn read_dag(m: &mut RunManifest, path: &Path) -> Result<Dag, CliError> {
    Ok(Dag::parse_any(&m.read(path)?)?)
}

fn roles_for(dag: &Dag, protected: &str, outcome: &str) -> Result<AuditRoles, CliError> {
    let roles = AuditRoles::new(protected, outcome)?;
    roles.check(dag)?;
    Ok(roles)
}

fn schema_for(
    m: &mut RunManifest,
    path: Option<&Path>,
    csv_text: &str,
    roles: &AuditRoles,
) -> Result<Schema, CliError> {
    let Some(path) = path else {
        return Ok(Schema::infer(csv_text, roles.clone())?);
    };
    let schema = Schema::from_json(&m.read(path)?)?;
    if schema.roles != *roles {
        return Err(CliError::validation(format!(
            "schema roles ({}, {}) differ from --protected {} / --outcome {}",
            schema.roles.protected, schema.roles.outcome, roles.protected, roles.outcome
        )));
    }
    Ok(schema)
}

fn csv_in(text: &str, schema: &Schema, path: &Path) -> Result<Dataset, CliError> {
    load_csv(text, schema).map_err(|e| CliError::validation(format!("{}: {e}", path.display())))
}

struct Loaded {
    dag: Dag,
    roles: AuditRoles,
    schema: Schema,
    test: Dataset,
    train: Option<Dataset>,
    partition: NodePartition,
    distribution: EmpiricalJointDistribution,
}

fn load(inputs: &AuditInputs, m: &mut RunManifest) -> Result<Loaded, CliError> {
    let dag = read_dag(m, &inputs.dag)?;
    let roles = roles_for(&dag, &inputs.protected, &inputs.outcome)?;
    let data_text = m.read(&inputs.data)?;
    let train_text = inputs.train.as_deref().map(|p| m.read(p)).transpose()?;
    let schema = schema_for(m, inputs.schema.as_deref(), train_text.as_deref().unwrap_or(&data_text), &roles)?;
    let test = csv_in(&data_text, &schema, &inputs.data)?;
    let train = match (&train_text, &inputs.train) {
        (Some(text), Some(path)) => Some(csv_in(text, &schema, path)?),
        _ => None,
    };
    let partition = dag.partition(&roles)?;
    let descendants: Vec<String> = partition.descendants.iter().cloned().collect();
    schema.check_against_dag(&dag, descendants.iter().map(String::as_str))?;
    let distribution = match (&inputs.dist, &inputs.fit_dist_from) {
        (Some(path), _) => EmpiricalJointDistribution::from_json(&m.read(path)?)?,
        (None, Some(path)) => {
            let source = csv_in(&m.read(path)?, &schema, path)?;
            fit_distribution(&source, &descendants, inputs.bins as usize)?
        }
        (None, None) if descendants.is_empty() => EmpiricalJointDistribution::trivial(),
        (None, None) => {
            return Err(CliError::validation(format!(
                "{} has descendants {} in the DAG; supply --dist or --fit-dist-from",
                roles.outcome,
                descendants.join(", ")
            )))
        }
    };
    log::info!("loaded {} test records; descendants of {}: {:?}", test.len(), roles.outcome, descendants);
    Ok(Loaded { dag, roles, schema, test, train, partition, distribution })
}

fn default_features(loaded: &Loaded) -> Vec<String> {
    loaded
        .schema
        .names()
        .filter(|n| *n != loaded.roles.outcome && loaded.dag.node(n).is_some())
        .map(str::to_string)
        .collect()
}

fn build_model(spec: &str, features: Option<&[String]>, loaded: &Loaded, m: &mut RunManifest) -> Result<ClassifierModel, CliError> {
    let model = if let Some(path) = spec.strip_prefix("lookup:") {
        if features.is_some() {
            return Err(CliError::validation("--features cannot be combined with a lookup model; the table names its features"));
        }
        ClassifierModel::lookup(LookupTable::from_json(&m.read(Path::new(path))?)?)
    } else {
        let features = features.map(<[String]>::to_vec).unwrap_or_else(|| default_features(loaded));
        if let Some(command) = spec.strip_prefix("external:") {
            ClassifierModel::external(command, &loaded.schema, &features)?
        } else {
            let recipe = ClassifierModel::parse_train_spec(spec)?;
            let train = loaded
                .train
                .as_ref()
                .ok_or_else(|| CliError::validation(format!("built-in model `{spec}` needs --train")))?;
            ClassifierModel::train(recipe, train, &features)?
        }
    };
    loaded.schema.check_against_dag(&loaded.dag, model.feature_names().iter().map(String::as_str))?;
    log::info!("model {spec} over {:?}", model.feature_names());
    Ok(model)
}

pub fn audit(args: &AuditArgs) -> Result<(), CliError> {
    let mut m = RunManifest::new("audit", args);
    let loaded = load(&args.inputs, &mut m)?;
    let model = build_model(&args.model, args.inputs.features.as_deref(), &loaded, &mut m)?;
    let cfg = AuditConfig::new(args.alpha, loaded.partition.clone(), loaded.distribution.clone())?;
    let report = collider_audit::audit(&model, &loaded.test, &loaded.roles, &cfg)?;
    m.write(&with_suffix(&args.out, ".csv"), &report.to_csv())?;
    m.write(&with_suffix(&args.out, ".json"), &pretty(&report.to_json()))?;
    let s = report.summary();
    println!(
        "audited {} records: {} flagged by the unbiased test (ds > {}), {} by the naive test",
        s.n, s.flagged, s.alpha, s.naive_flagged
    );
    m.finish(&with_suffix(&args.out, ".manifest.json"))
}

pub fn eval(args: &EvalArgs) -> Result<(), CliError> {
    let mut m = RunManifest::new("eval", args);
    let loaded = load(&args.inputs, &mut m)?;
    let truths = loaded.test.column(&args.truth_column)?;
    // Scores do not depend on the threshold.
    let cfg = AuditConfig::new(1.0, loaded.partition.clone(), loaded.distribution.clone())?;
    let mut rows: Vec<(String, Comparison)> = Vec::new();
    let mut per_record = String::from("model,id,truth,nds,ds\n");
    for spec in &args.model {
        let model = build_model(spec, args.inputs.features.as_deref(), &loaded, &mut m)?;
        let report = collider_audit::audit(&model, &loaded.test, &loaded.roles, &cfg)?;
        let c = compare_report(&report, &truths)?;
        for r in &c.per_record {
            per_record.push_str(&format!("{spec},{},{},{},{}\n", r.id, r.truth, r.nds, r.ds));
        }
        rows.push((spec.clone(), c));
    }
    let labelled: Vec<(String, &Comparison)> = rows.iter().map(|(s, c)| (s.clone(), c)).collect();
    let table = Comparison::table(&labelled);
    let models: Vec<serde_json::Value> =
        rows.iter().map(|(spec, c)| json!({ "model": spec, "nst": c.nst, "ust": c.ust })).collect();
    let report = json!({
        "convention": rows[0].1.convention,
        "truth_column": args.truth_column,
        "models": models,
        "truth_histogram": rows[0].1.truth_histogram,
    });
    print!("{table}");
    m.write(&with_suffix(&args.out, ".txt"), &table)?;
    m.write(&with_suffix(&args.out, ".json"), &pretty(&report))?;
    m.write(&with_suffix(&args.out, ".records.csv"), &per_record)?;
    m.finish(&with_suffix(&args.out, ".manifest.json"))
}

pub fn check_dag(args: &CheckDagArgs) -> Result<(), CliError> {
    let mut m = RunManifest::new("check-dag", args);
    let dag = read_dag(&mut m, &args.dag)?;
    let roles = roles_for(&dag, &args.protected, &args.outcome)?;
    let report = validate_for_audit(&dag, &roles);
    let as_json = pretty(&serde_json::to_value(&report).expect("report serializes"));
    if args.json {
        print!("{as_json}");
    } else {
        print!("{}", report.to_text());
    }
    if let Some(out) = &args.out {
        m.write(out, &as_json)?;
        m.finish(&with_suffix(out, ".manifest.json"))?;
    }
    Ok(())
}

pub fn demo(args: &DemoArgs) -> Result<(), CliError> {
    let mut m = RunManifest::new("demo-collider", args);
    m.seed("sampler", args.seed);
    let demo = ColliderDemo::build(args.n as usize, args.seed)?;
    let cfg = demo.config(args.alpha)?;
    let report = collider_audit::audit(&demo.classifier, &demo.test, &demo.roles, &cfg)?;
    let race_only = demo.race_only()?;
    let lookup = serde_json::to_value(&demo.lookup).expect("lookup serializes");

    m.write(&with_suffix(&args.out, ".dag"), DEMO_DAG)?;
    m.write(&with_suffix(&args.out, ".data.csv"), &demo.test.to_csv())?;
    m.write(&with_suffix(&args.out, ".lookup.json"), &pretty(&lookup))?;
    m.write(&with_suffix(&args.out, ".dist.json"), &(demo.distribution.to_json() + "\n"))?;
    m.write(&with_suffix(&args.out, ".report.csv"), &report.to_csv())?;
    m.write(&with_suffix(&args.out, ".report.json"), &pretty(&report.to_json()))?;

    println!("P(Salary=high | Race=white) = {:.3}, P(Salary=high | Race=other) = {:.3}", race_only[&0], race_only[&1]);
    let ids: Vec<usize> = demo.test.records.iter().take(8).map(|r| r.id).collect();
    print!("{}", example_table(&report, &demo.test, &demo.test.schema, &ids, None));
    let s = report.summary();
    println!("{} individuals: naive test flags {}, unbiased test flags {} (alpha {})", s.n, s.naive_flagged, s.flagged, s.alpha);
    m.finish(&with_suffix(&args.out, ".manifest.json"))
}

pub fn fit_dist(args: &FitDistArgs) -> Result<(), CliError> {
    let mut m = RunManifest::new("fit-dist", args);
    let dag = read_dag(&mut m, &args.dag)?;
    let roles = roles_for(&dag, &args.protected, &args.outcome)?;
    let text = m.read(&args.data)?;
    let schema = schema_for(&mut m, args.schema.as_deref(), &text, &roles)?;
    let data = csv_in(&text, &schema, &args.data)?;
    let variables = match &args.variables {
        Some(v) => v.clone(),
        None => dag.partition(&roles)?.descendants.into_iter().collect(),
    };
    let dist = fit_distribution(&data, &variables, args.bins as usize)?;
    m.write(&args.out, &(dist.to_json() + "\n"))?;
    eprintln!("fitted {} support tuples over {:?}", dist.support.len(), dist.variables);
    m.finish(&with_suffix(&args.out, ".manifest.json"))
}
