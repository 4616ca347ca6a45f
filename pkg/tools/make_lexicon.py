"""Regenerate src/acurai/resources/lexicon.tsv.

The lexicon stores one primary part of speech per base form; inflection is
handled at lookup time. Ambiguous open-class words get their noun reading
(ties resolve noun-first downstream).
"""
from __future__ import annotations

from pathlib import Path

DETERMINERS = """
the a an each every either neither some any no all both half much many more
most few fewer little less least such another same own certain
one two three four five six seven eight nine ten eleven twelve thirteen
fourteen fifteen sixteen seventeen eighteen nineteen twenty thirty forty fifty
sixty seventy eighty ninety hundred thousand million billion first second
third fourth fifth sixth seventh eighth ninth tenth
""".split()

PRONOUNS = """
i me my mine myself we us our ours ourselves you your yours yourself
yourselves he him his she her hers herself it its itself they them their
theirs themselves this that these those who whom which what whoever whatever
whichever somebody someone something anybody anyone anything everybody
everyone everything nobody nothing none
""".split()

PREPOSITIONS = """
of in on at by for with about against between into through during before
after above below to from up down under over off near across behind beyond
among around along within without toward towards upon per via despite except
until unto onto outside inside beneath beside amid regarding concerning
throughout underneath past
""".split()

CONJUNCTIONS = """
and or but nor so because although though while whereas if unless when
whenever where wherever as since than whether yet once
""".split()

VERBS = """
be have do can could may might must shall should will would ought need dare
say state find report note mention suggest claim believe think know feel
seem appear become remain continue stay stand lie lay sit rest go come leave
arrive depart return enter exit pass cross travel visit move run walk fly
swim climb jump fall rise drop pick lift push pull throw catch hit kick carry
bring take give get make let allow help lead contribute cause affect enable
depend rely relate refer apply concern matter influence determine limit
restrict extend reach achieve obtain acquire gain earn win lose spend waste
invest cost charge owe borrow lend pay buy sell send receive deliver
transport provide offer serve supply include contain consist comprise involve
require want wish hope expect plan prepare protect support own possess hold
keep save store load process generate evaluate assess review edit update
modify adjust fix repair solve resolve avoid ignore accept reject refuse
agree disagree argue discuss debate emphasize highlight focus concentrate
dominate control govern rule manage fail succeed happen occur exist live die
eat drink cook reheat heat warm cool cover uncover retain ensure flip
microwave wash clean cut chop break build create draw drive sing dance
remember forget understand mean wonder decide choose try attempt start begin
finish complete end wait watch listen hear touch smell taste love hate like
prefer enjoy play look see show shine grab plunge place put set establish
increase raise decrease declare expand contract sleep wake change open close
read write learn teach call ask answer talk speak tell work use improve
reduce cure alleviate associate boost melt boil freeze thaw evaporate
condense compress bend fold stretch twist rotate spin float sink absorb emit
radiate reflect conduct insulate ignite burn extinguish explode corrode rust
oxidize react produce form tarnish dissolve mix stir shake pour fill empty
measure count calculate estimate test verify check confirm prove demonstrate
explain describe define identify recognize discover explore examine
investigate analyze study research observe record track monitor search
announce ship declare perform act operate function install remove add join
connect separate divide share split combine merge collect gather compare
wear dress grow develop follow precede replace repeat copy print attach
detach wrap unfold press squeeze rub scratch dig bury plant harvest feed
breathe cough sneeze smile laugh cry shout whisper nod shake point wave
turn twist stand kneel bow stretch relax exercise train practice compete
race score defeat surrender retreat advance attack defend threaten warn
promise deny admit confess apologize thank congratulate welcome greet invite
introduce recommend advise instruct order command request beg persuade
convince encourage discourage inspire motivate impress surprise shock amaze
confuse clarify simplify complicate summarize conclude infer deduce assume
suppose imagine dream pretend lie cheat steal rob damage destroy ruin harm
hurt injure wound heal recover survive rescue escape hide reveal expose
display exhibit present represent symbolize indicate signal imply express
communicate translate interpret pronounce spell type click scroll browse
download upload stream publish broadcast advertise promote market negotiate
trade exchange rent lease hire employ fire retire resign quit volunteer
donate contribute vote elect appoint assign delegate schedule postpone cancel
confirm book reserve arrange organize sort classify categorize rank rate
prioritize filter select exclude omit skip miss lack suffice fit suit match
belong accompany assist cooperate collaborate participate engage interact
respond reply react adapt adjust conform comply obey violate breach exceed
surpass outperform underestimate overestimate appreciate value treasure
respect admire worship praise criticize blame accuse judge sentence punish
forgive pardon release arrest detain investigate prosecute defend testify
witness swear vow pledge commit dedicate devote sacrifice risk dare venture
explore wander roam drift settle inhabit occupy reside dwell migrate
emigrate immigrate flee evacuate abandon desert neglect maintain preserve
conserve sustain restore renovate rebuild redesign reorganize restructure
reform revise amend correct err stumble trip slip slide glide roll bounce
swing hang dangle suspend lean tilt bend crouch crawl creep sneak march
stride stroll wander jog sprint dash rush hurry delay linger pause hesitate
stutter stammer mumble murmur chant recite quote cite paraphrase reference
allude hint insinuate suggest propose offer bid tender submit withdraw
retract revoke repeal abolish ban prohibit forbid permit authorize license
certify validate invalidate nullify void
""".split()

ADJECTIVES = """
red blue green yellow orange purple pink brown black white beige violet
chemical physical silver grey gray monatomic diamagnetic paramagnetic
flammable soluble insoluble alkaline acidic powdery flaky hydrated anhydrous
metallic gaseous liquid solid molten important unique vital common uncommon
potential mental physical consistent inconsistent empty full safe unsafe
federal local national international industrial major minor minimum maximum
overall cardiovascular respiratory digestive simple easy difficult complex
new old young ancient modern good bad big small large great high low long
short tall wide narrow thick thin deep shallow heavy light fast slow quick
strong weak rich poor hot cold warm cool dry wet clean dirty hard soft
open closed near far true false real fake actual virtual same different
other several various certain possible impossible likely unlikely available
unavailable necessary unnecessary free busy public private social economic
political cultural natural artificial human personal medical legal illegal
final initial current recent previous next last main primary secondary basic
general special specific particular standard normal abnormal typical atypical
rare frequent steady rapid gradual sudden immediate instant constant variable
stable unstable durable fragile flexible rigid smooth rough sharp dull bright
dark pale vivid colorful transparent opaque visible invisible audible silent
loud quiet noisy calm peaceful violent gentle fierce mild severe serious
trivial significant insignificant relevant irrelevant useful useless helpful
harmful beneficial detrimental positive negative neutral active passive
aggressive defensive offensive friendly hostile polite rude kind cruel
generous selfish honest dishonest loyal faithful reliable unreliable
responsible irresponsible careful careless cautious reckless brave cowardly
confident nervous anxious worried relaxed comfortable uncomfortable
convenient inconvenient suitable unsuitable appropriate inappropriate proper
improper correct incorrect accurate inaccurate precise vague clear unclear
obvious subtle evident apparent hidden secret familiar unfamiliar famous
unknown popular unpopular successful unsuccessful effective ineffective
efficient inefficient productive creative innovative traditional
conventional unconventional ordinary extraordinary remarkable unremarkable
impressive disappointing satisfying unsatisfying acceptable unacceptable
sufficient insufficient adequate inadequate abundant scarce numerous
plentiful empty vacant occupied crowded dense sparse united divided separate
joint mutual individual collective entire whole partial complete incomplete
total absolute relative approximate exact equal unequal equivalent similar
identical distinct diverse uniform mixed pure impure raw refined fresh stale
ripe rotten healthy unhealthy sick ill fit weak tired energetic lively dead
alive extinct endangered wild domestic tame urban rural suburban coastal
inland mountainous flat hilly fertile barren arid humid tropical polar
temperate seasonal annual monthly weekly daily hourly permanent temporary
brief lengthy eternal infinite finite limited unlimited broad extensive
intensive comprehensive thorough superficial profound shallow elementary
advanced intermediate senior junior adult juvenile mature immature early
late punctual prompt delayed overdue upcoming past future present absent
internal external domestic foreign native alien central peripheral upper
lower inner outer front rear forward backward upward downward vertical
horizontal diagonal parallel perpendicular circular rectangular triangular
square round oval spherical cubic linear curved straight crooked twisted
golden wooden plastic glass paper cotton woolen leather ceramic concrete
electric electronic digital analog mechanical manual automatic autonomous
remote wireless optical acoustic thermal nuclear solar lunar stellar
cosmic global regional continental oceanic marine aquatic terrestrial
aerial underground underwater outdoor indoor
""".split()

ADVERBS = """
rapidly steadily sparingly widely nearly also very too quite rather almost
always never often sometimes usually currently recently approximately
however therefore moreover furthermore additionally besides consequently
meanwhile instead otherwise perhaps maybe probably possibly potentially
especially particularly generally typically essentially basically actually
really simply directly immediately finally eventually originally initially
previously significantly slightly completely entirely fully partly mostly
largely mainly primarily already still yet just even only again once twice
together apart away back forward ahead behind here there everywhere
somewhere anywhere nowhere now then today tomorrow yesterday soon later
earlier ago thus hence accordingly namely specifically notably certainly
definitely surely indeed truly honestly frankly clearly obviously evidently
apparently seemingly supposedly allegedly reportedly officially formally
informally privately publicly openly secretly quietly loudly softly gently
firmly strictly loosely tightly freely easily hardly barely scarcely merely
solely exclusively jointly mutually individually collectively separately
respectively alternatively likewise similarly differently equally unequally
roughly precisely exactly about not never ever anyway anyhow nowadays
somewhat somehow anymore moreover nonetheless nevertheless
""".split()

NOUNS = """
calcium magnesium metal nonmetal gas property density conductor insulator
electricity oxygen water hydrogen nitrogen nitride carbonate carbon dioxide
hydroxide oxide ion state oxidation solution slurry bubble temperature
compound element alloy reagent agent desulfurization ingredient firework
application dolomite magnesite sulfate epsomite chemistry coating surface
reaction mixture substance material particle atom molecule electron proton
neutron crystal mineral ore acid base salt sample unit measurement degree
celsius fahrenheit kelvin kilogram gram meter liter mole volume mass weight
pressure heat energy power force motion speed velocity light sound wave
frequency wavelength spectrum color shape size texture structure pattern
ice cube neck skull tummy video point minute hour second morning afternoon
evening night stomach benefit technique digestion sleep thyroid issue
symptom cold flu headache toothache risk lung heart disease mood health
boost month week year day date time fountain youth earth man woman child
person people bag store convenience bath bathtub chicken microwave plate
dish towel moisture edge step instruction oven stove pan pot bowl spoon
fork knife kitchen food meal dinner lunch breakfast snack drink beverage
wage hour law network employer worker employee amount revolution society
period industrialization history milestone era century decade progress
development growth decline change transition transformation movement
cruise control improvement citation identifier part number code label tag
mark sign signal system process method approach strategy plan program
project task job work career profession occupation business company firm
organization institution agency department division branch office factory
plant facility equipment machine device tool instrument apparatus engine
motor vehicle car automobile truck bus train plane airplane ship boat
bicycle road street highway bridge tunnel building house home apartment
room wall floor ceiling roof door window garden yard park field forest
tree plant flower grass leaf root branch seed fruit vegetable grain crop
farm animal dog cat bird fish horse cow sheep pig mouse insect spider
river lake sea ocean mountain hill valley desert island beach coast shore
weather climate rain snow wind storm cloud sky sun moon star planet space
universe world country nation city town village region area zone district
place location position site spot destination direction distance route
path way journey trip travel tour visit guide map address boundary border
government president minister official politician citizen resident
population community public society culture tradition custom habit
language word sentence phrase paragraph text document letter message
email mail note memo report article story news newspaper magazine book
page chapter section title author writer reader editor publisher library
school university college education student teacher professor lesson
course class lecture exam test question answer problem solution result
outcome consequence effect cause reason purpose goal objective target
aim intention motivation incentive reward prize penalty punishment fine
rule regulation policy standard requirement condition term agreement
contract deal arrangement negotiation discussion conversation dialogue
debate argument dispute conflict war peace battle fight struggle effort
attempt trial error mistake fault defect flaw failure success achievement
accomplishment victory defeat loss gain profit revenue income expense
budget fund money cash coin currency dollar euro price cost value worth
tax fee charge payment salary bonus pension insurance loan debt credit
investment saving account bank market economy trade commerce industry
sector agriculture manufacturing construction transportation communication
technology science research experiment theory hypothesis model concept
idea thought opinion view perspective belief faith religion philosophy
logic reason evidence proof fact truth reality illusion imagination dream
memory knowledge wisdom intelligence skill talent ability capacity
potential strength weakness advantage disadvantage opportunity threat
challenge difficulty obstacle barrier limit boundary constraint freedom
right privilege duty obligation responsibility authority power influence
leadership management administration supervision guidance support
assistance aid help service favor benefit interest concern care attention
focus emphasis priority importance significance relevance meaning
definition description explanation interpretation translation summary
conclusion introduction background context situation circumstance event
incident accident emergency crisis disaster catastrophe damage harm injury
wound pain suffering stress pressure tension anxiety fear worry doubt
hope wish desire need demand supply request offer proposal suggestion
recommendation advice tip hint clue key secret mystery puzzle riddle
game sport match competition tournament championship league team player
coach referee audience spectator fan crowd group crew staff member
partner colleague friend neighbor stranger guest host visitor customer
client consumer user buyer seller vendor supplier producer manufacturer
distributor retailer wholesaler merchant trader dealer agent broker
representative delegate ambassador messenger courier driver pilot captain
sailor soldier officer guard police detective lawyer judge jury court
justice crime theft robbery fraud murder violence abuse victim suspect
criminal prisoner jail prison sentence verdict appeal trial hearing
witness testimony statement declaration announcement notice warning alarm
alert signal indicator measure metric index rate ratio percentage fraction
proportion share portion piece slice segment component ingredient factor
variable parameter feature characteristic attribute quality trait aspect
dimension layer level stage phase cycle sequence series chain string row
column line curve angle corner side face edge surface top bottom middle
center core heart essence spirit soul mind brain body head eye ear nose
mouth tooth tongue lip chin cheek forehead hair arm hand finger thumb
nail wrist elbow shoulder chest back waist hip leg knee ankle foot toe
skin bone muscle nerve blood vein artery organ liver kidney bladder
intestine vitamin mineral protein carbohydrate fat fiber sugar starch
medicine drug pill tablet capsule dose treatment therapy surgery operation
doctor nurse patient hospital clinic pharmacy prescription diagnosis
infection virus bacteria germ immunity vaccine antibody allergy fever
cough sneeze wound scar bruise burn cut fracture sprain swelling
inflammation recovery rehabilitation exercise fitness diet nutrition
spa massage relaxation meditation yoga
""".split()

# a handful of words whose everyday tag differs from the suffix guess
OVERRIDES = {
    "there": "other",
    "not": "other",
    "n't": "other",
    "don't": "verb",
    "doesn't": "verb",
    "didn't": "verb",
    "isn't": "verb",
    "aren't": "verb",
    "wasn't": "verb",
    "weren't": "verb",
    "can't": "verb",
    "cannot": "verb",
    "won't": "verb",
    "wouldn't": "verb",
    "couldn't": "verb",
    "shouldn't": "verb",
    "hasn't": "verb",
    "haven't": "verb",
    "united": "adjective",
    "american": "adjective",
    "european": "adjective",
    "pre-menstrual": "adjective",
    "premenstrual": "adjective",
    "syndrome": "noun",
    "pms": "noun",
    "pmid": "noun",
    "doi": "noun",
    "llc": "proper-noun",
    "inc": "proper-noun",
    "ltd": "proper-noun",
    "tep": "noun",
    "vice": "adjective",
    "how": "other",
    "why": "other",
    "when": "conjunction",
    "where": "conjunction",
}


def main() -> None:
    entries: dict[str, str] = {}
    for words, pos in (
        (NOUNS, "noun"),
        (VERBS, "verb"),
        (ADJECTIVES, "adjective"),
        (ADVERBS, "other"),
        (DETERMINERS, "determiner"),
        (PREPOSITIONS, "preposition"),
        (CONJUNCTIONS, "conjunction"),
        (PRONOUNS, "pronoun"),
    ):
        for word in words:
            entries.setdefault(word, pos)  # earlier lists win: noun-first ties
    # closed classes must win over open-class duplicates
    for words, pos in (
        (DETERMINERS, "determiner"),
        (PREPOSITIONS, "preposition"),
        (CONJUNCTIONS, "conjunction"),
        (PRONOUNS, "pronoun"),
    ):
        for word in words:
            entries[word] = pos
    entries.update(OVERRIDES)

    out = Path(__file__).resolve().parents[1] / "src" / "acurai" / "resources" / "lexicon.tsv"
    lines = [f"{word}\t{pos}" for word, pos in sorted(entries.items())]
    out.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {len(lines)} entries to {out}")


if __name__ == "__main__":
    main()
